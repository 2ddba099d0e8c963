"""Synthesize a controller and Lyapunov function from a known model."""
from pathlib import Path
from typing import Optional

import click
import numpy as np

from polystab.config import get_runtime_settings, get_solver_settings
from polystab.models.types import ExitCode
from polystab.repositories.certificates import write_certificate

from scripts import config_constants, config_utils


@click.command('synth-model', help='Synthesize a controller from a known model')
@click.argument('problem_file', type=click.Path(dir_okay=False, path_type=Path))
@click.option('-o', '--output', type=click.Path(file_okay=False, path_type=Path), default=None,
              help='Output directory (default: runs/<problem name>).')
@click.option('--p-degree', type=click.IntRange(min=0), default=None, help='Override the degree of P.')
@click.option('--sos', is_flag=True, help='Also re-check the solved certificate by SOS.')
@config_utils.guarded
def synth_model(problem_file: Path, output: Optional[Path], p_degree: Optional[int], sos: bool):
    problem = config_utils.load_problem_file(problem_file)
    if p_degree is not None:
        problem = problem.with_degrees(problem.degrees.with_P(p_degree))
    config_utils.require_model(problem)
    settings = get_solver_settings()
    seed = get_runtime_settings().seed
    directory = config_utils.output_dir(output, problem.name)

    arguments = {'p_degree': p_degree, 'sos': sos}
    with config_utils.ArtifactWriter('synth-model', directory, [problem_file], seed, arguments) as writer:
        config_utils.print_status('INFO', f'Synthesizing {problem.name} from its model')
        certificate = config_utils.synthesize(problem, 'model', settings)
        writer.record(write_certificate(writer.path(config_constants.CERTIFICATE_NAME), problem.name, certificate))

        reports = config_utils.verification_reports(problem, certificate, np.random.default_rng(seed), sos, settings)
        writer.write_json(config_constants.REPORT_NAME, {k: r.to_dict() for k, r in reports.items()})
        config_utils.print_reports(reports)
        if not config_utils.reports_passed(reports):
            writer.conclude(ExitCode.VERIFICATION_FAILED)

    return writer.exit_code
