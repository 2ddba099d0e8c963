"""Synthesize one controller for every system consistent with noisy data."""
from pathlib import Path
from typing import Optional

import click
import numpy as np

from polystab.config import get_runtime_settings, get_solver_settings
from polystab.models.types import ExitCode
from polystab.repositories.certificates import write_certificate

from scripts import config_constants, config_utils


@click.command('synth-data', help='Synthesize a controller from data (DATA_FILE defaults to the embedded samples)')
@click.argument('problem_file', type=click.Path(dir_okay=False, path_type=Path))
@click.argument('data_file', type=click.Path(dir_okay=False, path_type=Path), required=False)
@click.option('-o', '--output', type=click.Path(file_okay=False, path_type=Path), default=None,
              help='Output directory (default: runs/<problem name>).')
@click.option('--sos', is_flag=True, help='Also re-check the solved certificate by SOS.')
@config_utils.guarded
def synth_data(problem_file: Path, data_file: Optional[Path], output: Optional[Path], sos: bool):
    problem = config_utils.load_problem_file(problem_file)
    inputs = [problem_file]
    if data_file is not None:
        problem = problem.with_dataset(config_utils.load_dataset_file(data_file))
        inputs.append(data_file)
    if problem.dataset is None:
        config_utils.print_status('ERROR', f'Problem {problem.name!r} has no samples; pass a DATA_FILE')
        return ExitCode.ERROR

    settings = get_solver_settings()
    seed = get_runtime_settings().seed
    directory = config_utils.output_dir(output, problem.name)

    arguments = {'data_file': str(data_file) if data_file else None, 'sos': sos}
    with config_utils.ArtifactWriter('synth-data', directory, inputs, seed, arguments) as writer:
        config_utils.print_status('INFO', f'Synthesizing {problem.name} from {problem.dataset.T} samples')
        certificate = config_utils.synthesize(problem, 'data', settings)
        writer.record(write_certificate(writer.path(config_constants.CERTIFICATE_NAME), problem.name, certificate))
        writer.write_json(config_constants.QMI_NAME, certificate.diagnostics.get('qmi'))

        reports = config_utils.verification_reports(problem, certificate, np.random.default_rng(seed), sos, settings)
        writer.write_json(config_constants.REPORT_NAME, {k: r.to_dict() for k, r in reports.items()})
        config_utils.print_reports(reports)
        if not config_utils.reports_passed(reports):
            writer.conclude(ExitCode.VERIFICATION_FAILED)

    return writer.exit_code
