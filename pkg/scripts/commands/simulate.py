"""Closed-loop simulation under a certificate's controller."""
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import click
import numpy as np

from polystab.config import get_runtime_settings
from polystab.dynamics import (
    IntegratorConfig,
    Trajectory,
    simulate_batch,
    verify_lyapunov_along,
)
from polystab.dynamics.closed_loop import converged
from polystab.dynamics.plots import render_traces
from polystab.models.types import ExitCode
from polystab.repositories.certificates import read_certificate
from polystab.repositories.problems import Problem
from polystab.synthesis.model import Certificate, extract_controller_lyapunov
from polystab.synthesis.plant import PlantModel
from polystab.utils.exceptions import DimensionMismatchError, StructureError

from scripts import config_utils


def run_closed_loop(writer: config_utils.ArtifactWriter, problem: Problem, certificate: Certificate,
                    initial_states: Sequence[np.ndarray], horizon: float, tolerance: float,
                    plant: Optional[PlantModel] = None, prefix: str = 'trajectory',
                    ) -> Tuple[List[Optional[Trajectory]], Dict]:
    """Simulate from each initial state, write one CSV per run and check V along it.

    Concludes ``writer`` with VERIFICATION_FAILED when a run blows up, ends
    outside ``tolerance`` of the origin, or breaks a Lyapunov check.
    """
    plant = plant if plant is not None else problem.closed_loop_plant
    if plant is None:
        raise StructureError(f'problem {problem.name!r} has no system to simulate')
    controller = extract_controller_lyapunov(certificate, problem.structure)
    trajectories = simulate_batch(plant, controller, initial_states, horizon, IntegratorConfig())

    runs = []
    for k, (x0, trajectory) in enumerate(zip(initial_states, trajectories)):
        run = {'x0': list(np.asarray(x0, dtype=float)), 'blew_up': trajectory is None}
        if trajectory is not None:
            writer.write_table(f'{prefix}_{k}.csv', trajectory.to_table(), trajectory.header())
            checks = verify_lyapunov_along(trajectory, controller, problem.epsilons, problem.structure)
            run.update(final=list(trajectory.final), final_norm=float(np.linalg.norm(trajectory.final)),
                       lyapunov=checks.to_dict())
        run['converged'] = converged(trajectory, tolerance)
        if not run['converged'] or not run.get('lyapunov', {}).get('passed', False):
            writer.conclude(ExitCode.VERIFICATION_FAILED)
            config_utils.print_status('WARNING', f'Run from {run["x0"]} did not settle (blew up: {run["blew_up"]})')
        runs.append(run)

    summary = {
        'horizon': horizon,
        'tolerance': tolerance,
        'converged': sum(r['converged'] for r in runs),
        'runs': runs,
    }
    return trajectories, summary


@click.command('simulate', help='Simulate the closed loop under a certificate')
@click.argument('certificate_file', type=click.Path(dir_okay=False, path_type=Path))
@click.argument('problem_file', type=click.Path(dir_okay=False, path_type=Path))
@click.option('--x0', 'x0', multiple=True, help='Initial state as comma-separated numbers; repeatable.')
@click.option('--horizon', type=click.FloatRange(min=0, min_open=True), default=None,
              help='Simulation horizon (default: from the problem file).')
@click.option('-o', '--output', type=click.Path(file_okay=False, path_type=Path), default=None,
              help='Output directory (default: next to the certificate).')
@click.option('--png', is_flag=True, help='Also render the state traces.')
@config_utils.guarded
def simulate(certificate_file: Path, problem_file: Path, x0: Tuple[str, ...], horizon: Optional[float],
             output: Optional[Path], png: bool):
    """Without --x0 the initial states of the problem file are used."""
    problem = config_utils.load_problem_file(problem_file)
    certificate = read_certificate(certificate_file, problem.space)
    seed = get_runtime_settings().seed
    states = [np.array(config_utils.parse_vector(text)) for text in x0]
    if not states:
        states = problem.initial_states(np.random.default_rng(seed))
    for state in states:
        if state.size != problem.shape.n:
            raise DimensionMismatchError(f"initial state {list(state)} needs {problem.shape.n} entries")
    simulation = problem.spec.simulation
    horizon = horizon if horizon is not None else simulation.horizon
    directory = output if output is not None else certificate_file.parent

    arguments = {'x0': list(x0), 'horizon': horizon, 'png': png}
    with config_utils.ArtifactWriter('simulate', directory, [certificate_file, problem_file], seed,
                                     arguments) as writer:
        trajectories, summary = run_closed_loop(writer, problem, certificate, states, horizon,
                                                simulation.tolerance)
        writer.write_json('simulation.json', summary)
        if png:
            finished = [t for t in trajectories if t is not None]
            if finished:
                writer.record(render_traces(finished, writer.path('traces.png')))
        config_utils.print_status('INFO', f'{summary["converged"]}/{len(states)} runs reached the origin')

    return writer.exit_code
