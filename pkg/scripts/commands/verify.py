"""Re-check a certificate file against a problem file."""
from pathlib import Path
from typing import Optional

import click
import numpy as np

from polystab.config import get_runtime_settings, get_solver_settings
from polystab.models.types import ExitCode
from polystab.repositories.certificates import read_certificate

from scripts import config_constants, config_utils


@click.command('verify', help='Verify a certificate against a problem')
@click.argument('certificate_file', type=click.Path(dir_okay=False, path_type=Path))
@click.argument('problem_file', type=click.Path(dir_okay=False, path_type=Path))
@click.option('-o', '--output', type=click.Path(file_okay=False, path_type=Path), default=None,
              help='Output directory (default: next to the certificate).')
@click.option('--sos', is_flag=True, help='Also re-check the conditions by SOS for the fixed P and L.')
@click.option('--tolerance', type=float, default=1e-6, show_default=True,
              help='Accepted negative SOS margin.')
@config_utils.guarded
def verify(certificate_file: Path, problem_file: Path, output: Optional[Path], sos: bool, tolerance: float):
    problem = config_utils.load_problem_file(problem_file)
    certificate = read_certificate(certificate_file, problem.space)
    seed = get_runtime_settings().seed
    directory = output if output is not None else certificate_file.parent

    arguments = {'sos': sos, 'tolerance': tolerance}
    with config_utils.ArtifactWriter('verify', directory, [certificate_file, problem_file], seed,
                                     arguments) as writer:
        config_utils.print_status('INFO', f'Verifying {certificate.method} certificate for {problem.name}')
        reports = config_utils.verification_reports(problem, certificate, np.random.default_rng(seed), sos,
                                                    get_solver_settings(), tolerance)
        writer.write_json(config_constants.REPORT_NAME, {k: r.to_dict() for k, r in reports.items()})
        config_utils.print_reports(reports)
        if not config_utils.reports_passed(reports):
            writer.conclude(ExitCode.VERIFICATION_FAILED)

    return writer.exit_code
