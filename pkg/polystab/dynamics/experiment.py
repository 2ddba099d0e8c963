"""Open-loop experiments that produce noisy derivative samples.

The noiseless trajectory is integrated under the excitation ``u(t)``; at each
sample time the derivative sample is the model evaluation plus a noise draw
from the ball of radius ``omega``.
"""
import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from polystab.config.schemas import ExperimentSpec, InputSpec
from polystab.dynamics.integrate import IntegratorConfig, integrate
from polystab.synthesis.plant import PlantModel
from polystab.synthesis.qmi import Dataset
from polystab.utils.exceptions import DimensionMismatchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InputTerm:
    kind: str
    amplitude: float
    frequency: float
    phase: float = 0.0

    def __call__(self, t: float) -> float:
        wave = np.sin if self.kind == 'sin' else np.cos
        return self.amplitude * wave(self.frequency * t + self.phase)


@dataclass(frozen=True)
class InputSignal:
    """One input channel: a sum of sinusoids, or a piecewise-constant table when given."""
    terms: Tuple[InputTerm, ...] = ()
    table_times: Tuple[float, ...] = ()
    table_values: Tuple[float, ...] = ()

    @classmethod
    def from_spec(cls, spec: InputSpec) -> 'InputSignal':
        terms = tuple(InputTerm(t.kind, t.amplitude, t.frequency, t.phase) for t in spec.terms)
        if spec.table is None:
            return cls(terms)
        return cls(terms, tuple(spec.table.times), tuple(spec.table.values))

    def __call__(self, t: float) -> float:
        total = sum(term(t) for term in self.terms)
        if self.table_times:
            k = max(int(np.searchsorted(self.table_times, t, side='right')) - 1, 0)
            total += self.table_values[k]
        return float(total)


@dataclass(frozen=True)
class ExperimentConfig:
    x0: Tuple[float, ...]
    inputs: Tuple[InputSignal, ...]
    horizon: float
    sample_times: Tuple[float, ...]
    omega: float = 0.0
    seed: int = 0
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self):
        times = self.sample_times
        if not times or any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError('sample times must be non-empty and strictly increasing')
        if times[0] < 0 or times[-1] > self.horizon:
            raise ValueError(f'sample times must lie within [0, {self.horizon}]')
        if self.omega < 0:
            raise ValueError(f'omega must be non-negative, got {self.omega}')

    @classmethod
    def from_spec(cls, spec: ExperimentSpec) -> 'ExperimentConfig':
        return cls(tuple(spec.x0), tuple(InputSignal.from_spec(s) for s in spec.inputs), spec.horizon,
                   tuple(spec.sample_times), spec.omega, spec.seed)

    def u(self, t: float) -> np.ndarray:
        return np.array([signal(t) for signal in self.inputs])


@dataclass(eq=False)
class Experiment:
    dataset: Dataset
    noise: np.ndarray
    energy: float
    bound: float

    def to_dict(self) -> dict:
        return {'T': self.dataset.T, 'realized_energy': self.energy, 'energy_bound': self.bound}


def ball_noise(rng: np.random.Generator, count: int, n: int, omega: float) -> np.ndarray:
    """``count`` draws uniform in the n-ball of radius ``omega`` (radius ``omega * U^(1/n)``)."""
    directions = rng.standard_normal((count, n))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = omega * rng.uniform(size=count) ** (1.0 / n)
    return directions * radii[:, None]


def run_experiment(plant: PlantModel, cfg: ExperimentConfig) -> Experiment:
    """Simulate the true plant under ``cfg.inputs`` and sample it.

    Raises:
        IntegrationError: the open-loop trajectory blew up.
    """
    shape = plant.shape
    if len(cfg.x0) != shape.n:
        raise DimensionMismatchError(f'x0 has {len(cfg.x0)} entries, plant has {shape.n} states')
    if len(cfg.inputs) != shape.m:
        raise DimensionMismatchError(f'{len(cfg.inputs)} input signals given, plant has {shape.m} inputs')

    def open_loop(t, x):
        return plant.field(x[None, :], cfg.u(t)[None, :])[0]

    trajectory = integrate(open_loop, cfg.x0, cfg.horizon, cfg.integrator)
    times = np.asarray(cfg.sample_times)
    X = trajectory.at(times)
    U = np.array([cfg.u(t) for t in times])
    clean = plant.field(X, U)
    rng = np.random.default_rng(cfg.seed)
    noise = ball_noise(rng, times.size, shape.n, cfg.omega)
    Xdot = clean + noise
    energy = float(np.sum(noise ** 2))
    bound = cfg.omega ** 2 * times.size
    logger.info(f"Experiment: {times.size} samples, realized noise energy {energy:.3e} (bound {bound:.3e})")
    return Experiment(Dataset(times, X.T, Xdot.T, U.T), noise, energy, bound)
