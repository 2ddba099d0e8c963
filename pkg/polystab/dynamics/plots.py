"""Plot data for phase portraits and trajectory traces.

Everything is written as CSV first; PNG rendering through matplotlib is
optional and only reads the same arrays.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import contourpy
import numpy as np

from polystab.dynamics.closed_loop import boundary_points, simulate_batch
from polystab.dynamics.integrate import IntegratorConfig, Trajectory
from polystab.synthesis.lyapunov import ControllerLyapunov
from polystab.synthesis.plant import PlantModel

logger = logging.getLogger(__name__)

LEVEL_GRID = 201
ARROW_GRID = 21
DEFAULT_QUANTILES = (0.02, 0.05, 0.1, 0.2, 0.35, 0.5)

ValueFn = Callable[[np.ndarray], np.ndarray]


@dataclass(eq=False)
class PhasePortrait:
    box: float
    arrows: np.ndarray
    trajectories: List[Trajectory] = field(default_factory=list)
    levels: List[Tuple[float, np.ndarray]] = field(default_factory=list)


def arrow_field(vector_field: ValueFn, box: float, count: int = ARROW_GRID) -> np.ndarray:
    """Unit-length arrows on a ``count x count`` grid; rows ``(x1, x2, d1, d2)``."""
    axis = np.linspace(-box, box, count)
    X1, X2 = np.meshgrid(axis, axis)
    points = np.column_stack([X1.ravel(), X2.ravel()])
    directions = vector_field(points)
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    directions = np.divide(directions, norms, out=np.zeros_like(directions), where=norms > 0)
    return np.hstack([points, directions])


def level_sets(value: ValueFn, box: float, levels: Optional[Sequence[float]] = None,
               grid: int = LEVEL_GRID) -> List[Tuple[float, np.ndarray]]:
    """Level-set polylines of ``value`` over ``[-box, box]^2`` by marching squares.

    Without explicit ``levels`` a fixed set of quantiles of the sampled values
    is used.
    """
    axis = np.linspace(-box, box, grid)
    X1, X2 = np.meshgrid(axis, axis)
    V = value(np.column_stack([X1.ravel(), X2.ravel()])).reshape(X1.shape)
    if levels is None:
        levels = sorted(set(float(q) for q in np.quantile(V, DEFAULT_QUANTILES)))
    generator = contourpy.contour_generator(X1, X2, V, line_type=contourpy.LineType.Separate)
    lines = []
    for level in levels:
        for line in generator.lines(level):
            if len(line) > 1:
                lines.append((float(level), np.asarray(line)))
    logger.debug(f"Traced {len(lines)} level-set polylines over {len(levels)} levels")
    return lines


def phase_portrait(plant: PlantModel, controller: ControllerLyapunov, box: float, horizon: float = 50.0,
                   levels: Optional[Sequence[float]] = None, cfg: IntegratorConfig = IntegratorConfig()) -> PhasePortrait:
    """Arrows, closed-loop trajectories from the 8 boundary points and ``V`` level sets of a planar loop."""
    if plant.shape.n != 2:
        raise ValueError(f'phase portraits need a planar system, got n = {plant.shape.n}')
    arrows = arrow_field(lambda points: controller.closed_loop(plant, points), box)
    runs = simulate_batch(plant, controller, boundary_points(box), horizon, cfg)
    return PhasePortrait(box, arrows, [r for r in runs if r is not None], level_sets(controller.value, box, levels))


def trace_table(trajectories: Sequence[Trajectory], dense: Optional[int] = None) -> Tuple[np.ndarray, str]:
    """Stack trajectories into ``(run, t, x_1..x_n)`` rows, optionally resampled on a dense grid."""
    n = trajectories[0].n
    blocks = []
    for k, trajectory in enumerate(trajectories):
        if dense is None:
            t, states = trajectory.t, trajectory.states
        else:
            t = trajectory.dense(dense)
            states = trajectory.at(t)
        blocks.append(np.column_stack([np.full(t.size, k), t, states]))
    header = ','.join(['run', 't'] + [f'x_{i + 1}' for i in range(n)])
    return np.vstack(blocks), header


def write_portrait(portrait: PhasePortrait, directory: Path, stem: str) -> List[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths = [directory / f'{stem}_arrows.csv', directory / f'{stem}_trajectories.csv',
             directory / f'{stem}_levels.csv']
    np.savetxt(paths[0], portrait.arrows, delimiter=',', header='x_1,x_2,d_1,d_2', comments='')
    if portrait.trajectories:
        table, header = trace_table(portrait.trajectories)
    else:
        table, header = np.zeros((0, 4)), 'run,t,x_1,x_2'
    np.savetxt(paths[1], table, delimiter=',', header=header, comments='')
    rows = [np.column_stack([np.full(len(line), level), np.full(len(line), k), line])
            for k, (level, line) in enumerate(portrait.levels)]
    levels = np.vstack(rows) if rows else np.zeros((0, 4))
    np.savetxt(paths[2], levels, delimiter=',', header='level,line,x_1,x_2', comments='')
    return paths


def write_traces(trajectories: Sequence[Trajectory], path: Path, dense: int = 2001) -> Path:
    table, header = trace_table(trajectories, dense)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, table, delimiter=',', header=header, comments='')
    return path


def _pyplot():
    import matplotlib
    matplotlib.use('Agg')
    from matplotlib import pyplot as plt
    return plt


def render_portrait(portrait: PhasePortrait, path: Path) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 6))
    a = portrait.arrows
    ax.quiver(a[:, 0], a[:, 1], a[:, 2], a[:, 3], color='0.6', angles='xy', scale=30)
    for _, line in portrait.levels:
        ax.plot(line[:, 0], line[:, 1], color='tab:orange', lw=0.8)
    for trajectory in portrait.trajectories:
        ax.plot(trajectory.states[:, 0], trajectory.states[:, 1], color='tab:blue', lw=1.2)
    ax.set_xlim(-portrait.box, portrait.box)
    ax.set_ylim(-portrait.box, portrait.box)
    ax.set_xlabel('$x_1$')
    ax.set_ylabel('$x_2$')
    ax.grid(ls='--')
    fig.savefig(path, dpi=150, bbox_inches='tight')
    plt.close(fig)
    return path


def render_traces(trajectories: Sequence[Trajectory], path: Path, labels: Optional[Sequence[str]] = None) -> Path:
    plt = _pyplot()
    n = trajectories[0].n
    labels = labels or [f'$x_{i + 1}$' for i in range(n)]
    fig, axes = plt.subplots(n, 1, figsize=(7, 2 * n), sharex=True, squeeze=False)
    for i, ax in enumerate(axes[:, 0]):
        for trajectory in trajectories:
            t = trajectory.dense()
            ax.plot(t, trajectory.at(t)[:, i], lw=1.0)
        ax.set_ylabel(labels[i])
        ax.grid(ls='--')
    axes[-1, 0].set_xlabel('t')
    fig.savefig(path, dpi=150, bbox_inches='tight')
    plt.close(fig)
    return path
