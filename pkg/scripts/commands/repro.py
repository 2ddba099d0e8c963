"""Reproduce a bundled example end to end: recorded certificate, synthesis, verification, closed loop."""
from dataclasses import replace
from pathlib import Path
from typing import Optional

import click
import numpy as np

from polystab.config import get_runtime_settings, get_solver_settings
from polystab.dynamics.plots import phase_portrait, render_portrait, render_traces, write_portrait, write_traces
from polystab.models.types import ExitCode
from polystab.repositories.certificates import write_certificate
from polystab.repositories.examples import EXAMPLES, compare_with_reference, example_path, load_example
from polystab.repositories.problems import Problem
from polystab.synthesis.data import check_data_conditions
from polystab.synthesis.model import Certificate, check_model_conditions, extract_controller_lyapunov
from polystab.synthesis.qmi import membership_check
from polystab.utils.exceptions import InfeasibleError

from scripts import config_constants, config_utils
from scripts.commands.simulate import run_closed_loop

# Recorded certificates are printed to four decimals; ex1 is exact.
EXACT_TOLERANCE = 1e-9
PRINTED_TOLERANCE = 5e-4
EXACT_SOS_TOLERANCE = 1e-6
PRINTED_SOS_TOLERANCE = 1e-3
PERTURBATIONS = (0.0, 1e-3, 1e-2, 1e-1)


def _constant_P(problem: Problem) -> Problem:
    return problem.with_degrees(problem.degrees.with_P(0))


def fixture_facts(problem: Problem) -> dict:
    facts = {'n': problem.shape.n, 'm': problem.shape.m, 'ell': problem.shape.ell, 'p': problem.structure.p}
    if problem.dataset is not None:
        data = problem.data_matrices()
        facts.update(T=data.T, phi11=problem.noise().phi11, F_first_column=list(data.F[:, 0]),
                     smallest_singular_value=float(data.singular_values[-1]))
    if problem.prior is not None:
        facts.update(known=list(problem.prior.alpha), unknown=list(problem.prior.alpha_hat))
    return facts


def check_reference(writer: config_utils.ArtifactWriter, problem: Problem, exact: bool) -> Optional[dict]:
    """Derived ``det P``, ``eta`` and ``xi`` against the displays, plus an SOS re-check of the printed P and L."""
    reference = problem.reference_certificate()
    if reference is None:
        return None
    writer.record(write_certificate(writer.path('reference_certificate.json'), problem.name, reference))
    controller = extract_controller_lyapunov(reference, problem.structure)
    displays = compare_with_reference(problem, controller, EXACT_TOLERANCE if exact else PRINTED_TOLERANCE)

    tolerance = EXACT_SOS_TOLERANCE if exact else PRINTED_SOS_TOLERANCE
    settings = get_solver_settings()
    if problem.plant is not None:
        sos = check_model_conditions(problem.plant, problem.structure, problem.epsilons, reference.P, reference.L,
                                     settings, tolerance)
    else:
        sos = check_data_conditions(problem.shape, problem.structure, problem.epsilons, reference.P, reference.L,
                                    problem.compatible_set(), problem.prior, settings, tolerance)
    for section, report in (('displays', displays), ('sos', sos)):
        if not report.passed:
            config_utils.print_status('WARNING', f'Recorded certificate fails {section}: '
                                                 f'{", ".join(c.name for c in report.failed)}')
            writer.conclude(ExitCode.VERIFICATION_FAILED)
    return {'displays': displays.to_dict(), 'sos': sos.to_dict()}


def try_synthesis(problem: Problem, method: str) -> tuple:
    """``(certificate or None, outcome)``; infeasibility is an outcome here, not an error."""
    try:
        certificate = config_utils.synthesize(problem, method, get_solver_settings())
    except InfeasibleError as e:
        return None, {'method': method, 'status': 'infeasible', 'message': str(e)}
    return certificate, {'method': method, 'status': str(certificate.status),
                         'margin': certificate.diagnostics.get('margin')}


def ex3_contrast(problem: Problem) -> dict:
    """Constant-P model-based synthesis on the true system, and membership of nearby systems."""
    true_plant = problem.true_plant
    _, model_outcome = try_synthesis(_constant_P(replace(problem, plant=true_plant)), 'model')
    qmi = problem.compatible_set()
    probes = []
    for a in PERTURBATIONS:
        A1 = true_plant.A1.copy()
        A1[0, -1] = a
        membership = membership_check(qmi, A1, true_plant.A2, true_plant.B2)
        probes.append({'a': a, 'in_set': membership.in_sigma, 'slack': membership.slack})
    return {'model_constant_P': model_outcome, 'membership': probes}


def write_plot_data(writer: config_utils.ArtifactWriter, problem: Problem, certificate: Certificate,
                    trajectories, horizon: float, png: bool):
    finished = [t for t in trajectories if t is not None]
    if problem.shape.n == 2:
        controller = extract_controller_lyapunov(certificate, problem.structure)
        portrait = phase_portrait(problem.closed_loop_plant, controller, config_constants.PORTRAIT_BOX, horizon)
        for path in write_portrait(portrait, writer.directory, 'portrait'):
            writer.record(path)
        if png:
            writer.record(render_portrait(portrait, writer.path('portrait.png')))
    elif finished:
        writer.record(write_traces(finished, writer.path('traces.csv')))
        if png:
            writer.record(render_traces(finished, writer.path('traces.png')))


@click.command('repro', help='Reproduce a bundled example')
@click.argument('example', type=click.Choice(EXAMPLES))
@click.option('-o', '--output', type=click.Path(file_okay=False, path_type=Path), default=None,
              help='Output directory (default: runs/repro_<example>).')
@click.option('--constant-P', 'constant_p', is_flag=True, help='Restrict P to a constant matrix.')
@click.option('--previous-work', is_flag=True,
              help='Also run the earlier SOS conditions (M - eps2 I SOS) with a constant P.')
@click.option('--reference-only', is_flag=True,
              help='Skip synthesis; check and simulate the recorded certificate.')
@click.option('--png', is_flag=True, help='Also render plots.')
@click.option('--seed', type=int, default=None, help='Seed for sampled checks and random initial states.')
@config_utils.guarded
def repro(example: str, output: Optional[Path], constant_p: bool, previous_work: bool, reference_only: bool,
          png: bool, seed: Optional[int]):
    problem = load_example(example)
    if constant_p:
        problem = _constant_P(problem)
    seed = seed if seed is not None else get_runtime_settings().seed
    rng = np.random.default_rng(seed)
    directory = config_utils.output_dir(output, f'repro_{example}')
    simulation = problem.spec.simulation

    arguments = {'example': example, 'constant_P': constant_p, 'previous_work': previous_work,
                 'reference_only': reference_only, 'png': png}
    with config_utils.ArtifactWriter('repro', directory, [example_path(example)], seed, arguments) as writer:
        summary = {'example': example, 'seed': seed, 'fixture': fixture_facts(problem)}
        if not constant_p:
            summary['reference'] = check_reference(writer, problem, exact=example == 'ex1')

        if previous_work:
            _, summary['previous_work'] = try_synthesis(_constant_P(problem), 'previous-work')
            config_utils.print_status('INFO', f'Earlier conditions with constant P: '
                                              f'{summary["previous_work"]["status"]}')

        certificate = problem.reference_certificate() if reference_only else None
        if not reference_only:
            method = 'model' if problem.plant is not None else 'data'
            config_utils.print_status('INFO', f'Synthesizing {example} ({method}-based, P degree '
                                              f'{problem.degrees.P})')
            certificate, summary['synthesis'] = try_synthesis(problem, method)
            if certificate is None:
                config_utils.print_status('WARNING', f'{example}: synthesis infeasible')
                writer.conclude(ExitCode.INFEASIBLE)
            else:
                writer.record(write_certificate(writer.path(config_constants.CERTIFICATE_NAME), problem.name,
                                                certificate))
                reports = config_utils.verification_reports(problem, certificate, rng)
                writer.write_json(config_constants.REPORT_NAME, {k: r.to_dict() for k, r in reports.items()})
                summary['verification'] = {k: r.passed for k, r in reports.items()}
                config_utils.print_reports(reports)
                if not config_utils.reports_passed(reports):
                    writer.conclude(ExitCode.VERIFICATION_FAILED)

        if example == 'ex3' and not reference_only:
            summary['contrast'] = ex3_contrast(problem)

        if certificate is not None:
            trajectories, summary['closed_loop'] = run_closed_loop(
                writer, problem, certificate, problem.initial_states(rng), simulation.horizon, simulation.tolerance)
            write_plot_data(writer, problem, certificate, trajectories, simulation.horizon, png)

        summary['status'] = writer.status
        writer.write_json(config_constants.SUMMARY_NAME, summary)

    return writer.exit_code
