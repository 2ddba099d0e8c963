from polystab.dynamics.closed_loop import (
    boundary_points,
    simulate_batch,
    simulate_closed_loop,
    verify_lyapunov_along,
)
from polystab.dynamics.experiment import Experiment, ExperimentConfig, InputSignal, ball_noise, run_experiment
from polystab.dynamics.integrate import IntegratorConfig, Trajectory, integrate
from polystab.dynamics.plots import PhasePortrait, level_sets, phase_portrait


__all__ = [
    "Experiment",
    "ExperimentConfig",
    "InputSignal",
    "IntegratorConfig",
    "PhasePortrait",
    "Trajectory",
    "ball_noise",
    "boundary_points",
    "integrate",
    "level_sets",
    "phase_portrait",
    "run_experiment",
    "simulate_batch",
    "simulate_closed_loop",
    "verify_lyapunov_along",
]
