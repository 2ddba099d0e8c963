"""Adaptive explicit Runge-Kutta integration with Hermite dense output."""
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from polystab.utils.exceptions import DimensionMismatchError, IntegrationError

logger = logging.getLogger(__name__)

VectorField = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = 'RK45'
    rtol: float = 1e-8
    atol: float = 1e-10
    blowup: float = 1e6
    max_step: float = np.inf


@dataclass(eq=False)
class Trajectory:
    """Accepted steps of one integration; ``V``/``Vdot`` are filled in by the closed-loop runner."""
    t: np.ndarray
    states: np.ndarray
    derivatives: np.ndarray
    V: Optional[np.ndarray] = None
    Vdot: Optional[np.ndarray] = None
    vector_field: Optional[VectorField] = field(default=None, repr=False)
    _spline: Optional[CubicHermiteSpline] = field(default=None, init=False, repr=False)

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)

    @property
    def spline(self) -> Optional[CubicHermiteSpline]:
        if self._spline is None and self.t.size > 1:
            self._spline = CubicHermiteSpline(self.t, self.states, self.derivatives, axis=0)
        return self._spline

    def at(self, times) -> np.ndarray:
        """Dense states at ``times``; shape ``(len(times), n)``."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if self.spline is None:
            return np.repeat(self.states[:1], times.size, axis=0)
        return self.spline(times)

    def dense(self, count: int = 2001) -> np.ndarray:
        return np.linspace(self.t[0], self.t[-1], count)

    def to_table(self) -> np.ndarray:
        columns = [self.t[:, None], self.states]
        if self.V is not None:
            columns.append(self.V[:, None])
        if self.Vdot is not None:
            columns.append(self.Vdot[:, None])
        return np.hstack(columns)

    def header(self) -> str:
        names = ['t'] + [f'x_{k + 1}' for k in range(self.n)]
        if self.V is not None:
            names.append('V')
        if self.Vdot is not None:
            names.append('Vdot')
        return ','.join(names)


def integrate(vector_field: VectorField, x0, horizon: float, cfg: IntegratorConfig = IntegratorConfig(),
              t0: float = 0.0) -> Trajectory:
    """Integrate ``x' = vector_field(t, x)`` from ``x0`` over ``[t0, t0 + horizon]``.

    Raises:
        IntegrationError: ``||x||`` exceeded ``cfg.blowup``, or the solver
            failed (step size underflow).
    """
    x0 = np.asarray(x0, dtype=float).ravel()
    if not horizon > 0:
        raise ValueError(f'horizon must be positive, got {horizon}')
    probe = np.asarray(vector_field(t0, x0), dtype=float)
    if probe.shape != x0.shape:
        raise DimensionMismatchError(f'vector field returns shape {probe.shape}, state has {x0.shape}')

    def escaped(t, x):
        return cfg.blowup - np.linalg.norm(x)

    escaped.terminal = True
    escaped.direction = -1

    solution = solve_ivp(vector_field, (t0, t0 + horizon), x0, method=cfg.method, rtol=cfg.rtol, atol=cfg.atol,
                         max_step=cfg.max_step, events=escaped)
    if solution.status == 1:
        raise IntegrationError(f'state norm exceeded {cfg.blowup:.0e}', float(solution.t[-1]))
    if solution.status != 0:
        raise IntegrationError(solution.message, float(solution.t[-1]) if solution.t.size else None)
    t = solution.t
    states = solution.y.T
    derivatives = np.array([vector_field(ti, xi) for ti, xi in zip(t, states)], dtype=float)
    logger.debug(f"Integrated {t.size} steps to t={t[-1]:.6g}, |x|={np.linalg.norm(states[-1]):.3e}")
    return Trajectory(t, states, derivatives, vector_field=vector_field)
