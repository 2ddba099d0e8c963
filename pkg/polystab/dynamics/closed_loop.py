"""Closed-loop simulation under a synthesized controller and Lyapunov checks along trajectories."""
import logging
import time
from typing import List, Optional, Sequence

import numpy as np

from polystab.dynamics.integrate import IntegratorConfig, Trajectory, integrate
from polystab.models.types import CheckReport, CheckResult
from polystab.synthesis.lyapunov import ControllerLyapunov
from polystab.synthesis.plant import EpsilonConfig, PlantModel, StructureChoice
from polystab.utils.exceptions import IntegrationError, StructureError
from polystab.utils.executor import map_ordered

logger = logging.getLogger(__name__)

MONOTONE_TOL = 1e-9
DECAY_TOL = 1e-5
ORIGIN_RADIUS = 1e-6


def closed_loop_field(plant: PlantModel, controller: ControllerLyapunov):
    def vector_field(t, x):
        point = x[None, :]
        return plant.field(point, controller.control(point))[0]

    return vector_field


def attach_lyapunov(trajectory: Trajectory, controller: ControllerLyapunov) -> Trajectory:
    """Fill in ``V`` and ``Vdot = grad V . x'`` at the accepted steps."""
    trajectory.V = controller.value(trajectory.states)
    trajectory.Vdot = np.einsum('ni,ni->n', controller.gradient(trajectory.states), trajectory.derivatives)
    return trajectory


def simulate_closed_loop(plant: PlantModel, controller: ControllerLyapunov, x0, horizon: float,
                         cfg: IntegratorConfig = IntegratorConfig(), with_lyapunov: bool = True) -> Trajectory:
    """Integrate ``x' = A F(x) + B G(x) K(x)`` from ``x0``.

    Raises:
        StructureError: ``K(0) != 0``.
        IntegrationError: the trajectory blew up (the controller failed to
            stabilize from ``x0``).
    """
    origin = np.zeros((1, plant.space.dim))
    if np.any(np.abs(controller.control(origin)) > 1e-12):
        raise StructureError('K(0) must vanish for closed-loop simulation')
    trajectory = integrate(closed_loop_field(plant, controller), x0, horizon, cfg)
    if with_lyapunov:
        attach_lyapunov(trajectory, controller)
    return trajectory


def simulate_batch(plant: PlantModel, controller: ControllerLyapunov, initial_states: Sequence[Sequence[float]],
                   horizon: float, cfg: IntegratorConfig = IntegratorConfig()) -> List[Optional[Trajectory]]:
    """Closed-loop runs from each initial state on the shared pool; failed runs come back as ``None``."""
    started = time.perf_counter()

    def run(x0):
        try:
            return simulate_closed_loop(plant, controller, x0, horizon, cfg)
        except IntegrationError as e:
            logger.warning(f"Closed loop from {list(np.round(x0, 4))} failed: {e}")
            return None

    results = map_ordered(run, [np.asarray(x, dtype=float) for x in initial_states])
    failed = sum(r is None for r in results)
    logger.info(f"Simulated {len(results)} closed-loop trajectories ({failed} failed) "
                f"in {time.perf_counter() - started:.2f}s")
    return results


def boundary_points(box: float, n: int = 2) -> np.ndarray:
    """Corners and edge midpoints of ``[-box, box]^2``; the 8 compass points for ``n = 2``."""
    if n != 2:
        raise ValueError('boundary points are defined for planar systems')
    return box * np.array([[1, 0], [1, 1], [0, 1], [-1, 1], [-1, 0], [-1, -1], [0, -1], [1, -1]], dtype=float)


def random_states(rng: np.random.Generator, count: int, n: int, box: float) -> np.ndarray:
    """``count`` initial states drawn uniformly from ``[-box, box]^n``."""
    return rng.uniform(-box, box, size=(count, n))


def verify_lyapunov_along(trajectory: Trajectory, controller: ControllerLyapunov, cfg: EpsilonConfig,
                          structure: StructureChoice, dense: int = 2001) -> CheckReport:
    """Lyapunov conditions along one trajectory.

    ``monotone``: ``V`` decreases between accepted steps wherever
    ``||x|| > ORIGIN_RADIUS`` (slack ``MONOTONE_TOL * (1 + V)``).
    ``decay``: ``Vdot <= -(eps2/eps3) Z^T Z + DECAY_TOL`` on a uniform grid of
    ``dense`` times through the Hermite interpolant. Violations are listed in
    the check details, not raised.
    """
    V = trajectory.V if trajectory.V is not None else controller.value(trajectory.states)
    active = np.linalg.norm(trajectory.states[:-1], axis=1) > ORIGIN_RADIUS
    increase = np.diff(V) - MONOTONE_TOL * (1.0 + np.abs(V[:-1]))
    bad_steps = np.flatnonzero(active & (increase > 0))
    worst_step = int(np.argmax(np.where(active, increase, -np.inf))) if active.any() else 0
    monotone = CheckResult(
        'monotone', bad_steps.size == 0,
        float(increase[worst_step]) if increase.size else 0.0,
        tuple(float(v) for v in trajectory.states[worst_step]), MONOTONE_TOL,
        {'violations': [float(trajectory.t[k]) for k in bad_steps[:20]], 'count': int(bad_steps.size)},
    )

    times = trajectory.dense(dense)
    states = trajectory.at(times)
    if trajectory.vector_field is not None:
        velocity = np.array([trajectory.vector_field(t, x) for t, x in zip(times, states)])
    else:
        velocity = trajectory.spline(times, 1)
    Vdot = np.einsum('ni,ni->n', controller.gradient(states), velocity)
    Z = structure.Z.evaluate_many(states)[:, :, 0]
    floor = cfg.eps2.evaluate_many(states) / cfg.eps3.evaluate_many(states) * np.einsum('ni,ni->n', Z, Z)
    excess = Vdot + floor
    bad_points = np.flatnonzero(excess > DECAY_TOL)
    worst = int(np.argmax(excess))
    decay = CheckResult(
        'decay', bad_points.size == 0, float(excess[worst]), tuple(float(v) for v in states[worst]), DECAY_TOL,
        {'violations': [float(times[k]) for k in bad_points[:20]], 'count': int(bad_points.size)},
    )
    return CheckReport([monotone, decay])


def converged(trajectory: Optional[Trajectory], tolerance: float) -> bool:
    return trajectory is not None and float(np.linalg.norm(trajectory.final)) < tolerance
