"""Utility functions for the polystab command-line tools.

Provides functions for:
- Printing status lines
- Loading problem, certificate and dataset files with exit-code diagnostics
- Writing artifacts and the run manifest
- Mapping library errors to exit codes
"""
import functools
import hashlib
import json
import sys
import time
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import click
import numpy as np
import yaml
from pydantic import ValidationError

import polystab
from polystab.config.models import Solver
from polystab.models.types import CheckReport, ExitCode
from polystab.repositories.datasets import read_dataset
from polystab.repositories.problems import Problem, load_problem
from polystab.repositories.utils import jsonable
from polystab.sos.compiler import solve_program
from polystab.sos.program import SosProgram
from polystab.synthesis.data import (
    assemble_prior,
    assemble_theorem2,
    check_compatible_systems,
    check_data_conditions,
    synthesize_data,
)
from polystab.synthesis.model import (
    Certificate,
    assemble_previous_work,
    assemble_theorem1,
    certify_epsilons,
    check_model_conditions,
    synthesize_model,
    validate_structure,
    verify_certificate,
)
from polystab.synthesis.plant import PlantModel
from polystab.synthesis.qmi import Dataset
from polystab.utils.exceptions import InfeasibleError, PolystabError, StructureError

from . import config_constants, config_models


FILE_ERRORS = (PolystabError, ValidationError, yaml.YAMLError, json.JSONDecodeError, OSError, ValueError)


def print_status(type: str, message: str):
    """Print colored status message to stderr."""
    colors = {
        'SUCCESS': 'green',
        'WARNING': 'yellow',
        'ERROR': 'red',
        'INFO': None
    }
    click.secho(message, fg=colors.get(type), err=True)


def exit_code_for(error: BaseException) -> ExitCode:
    if isinstance(error, InfeasibleError):
        return ExitCode.INFEASIBLE
    return ExitCode.ERROR


def guarded(command):
    """Run a command body and exit with its ``ExitCode``; library errors become exit codes."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            code = command(*args, **kwargs)
        except InfeasibleError as e:
            print_status('WARNING', f'Infeasible: {e}')
            sys.exit(int(ExitCode.INFEASIBLE))
        except FILE_ERRORS as e:
            print_status('ERROR', f'{type(e).__name__}: {e}')
            sys.exit(int(ExitCode.ERROR))
        code = ExitCode.OK if code is None else code
        if code is ExitCode.OK:
            print_status('SUCCESS', 'Done')
        sys.exit(int(code))

    return wrapper


def load_problem_file(path: Path) -> Problem:
    """Load and validate a problem file.

    Returns:
        The built problem; on any file error prints the diagnostic and exits with code 1.
    """
    try:
        return load_problem(path)
    except FileNotFoundError:
        print_status('ERROR', f'Problem file missing at {path}')
    except FILE_ERRORS as e:
        print_status('ERROR', f'Invalid problem file {path}: {e}')

    sys.exit(int(ExitCode.ERROR))


def load_dataset_file(path: Path) -> Dataset:
    try:
        return read_dataset(path)
    except FileNotFoundError:
        print_status('ERROR', f'Dataset file missing at {path}')
    except FILE_ERRORS as e:
        print_status('ERROR', f'Invalid dataset file {path}: {e}')

    sys.exit(int(ExitCode.ERROR))


def output_dir(output: Optional[Path], name: str) -> Path:
    directory = output if output is not None else config_constants.RUNS_DIR / name
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def parse_vector(text: str) -> List[float]:
    """``'1,-2.5'`` -> ``[1.0, -2.5]``."""
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise ValueError(f"expected comma-separated numbers, got {text!r}")


def file_record(path: Path, base: Optional[Path] = None) -> config_models.ArtifactRecord:
    data = Path(path).read_bytes()
    shown = Path(path).relative_to(base) if base is not None and Path(path).is_relative_to(base) else Path(path)
    return config_models.ArtifactRecord(path=str(shown), sha256=hashlib.sha256(data).hexdigest(), size=len(data))


class ArtifactWriter:
    """Collects the files a command writes and closes with a manifest.

    Used as a context manager; an escaping exception still writes the
    manifest (status set from the error) before propagating, so partial
    bundles are listed.
    """

    def __init__(self, command: str, directory: Path, inputs: Iterable[Path] = (),
                 seed: Optional[int] = None, arguments: Optional[dict] = None):
        self.command = command
        self.directory = directory
        self.inputs = [Path(p) for p in inputs]
        self.seed = seed
        self.arguments = arguments or {}
        self.artifacts: List[Path] = []
        self.status = 'ok'
        self.exit_code = ExitCode.OK
        self._started = time.perf_counter()

    def __enter__(self) -> 'ArtifactWriter':
        self.directory.mkdir(parents=True, exist_ok=True)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None:
            self.conclude(exit_code_for(exc), f'{exc_type.__name__}: {exc}')
        self.write_manifest()
        return False

    def path(self, name: str) -> Path:
        return self.directory / name

    def record(self, path: Path) -> Path:
        path = Path(path)
        if path not in self.artifacts:
            self.artifacts.append(path)
        return path

    def write_json(self, name: str, data) -> Path:
        path = self.path(name)
        path.write_text(json.dumps(jsonable(data), indent=2, sort_keys=True) + '\n', encoding='utf-8')
        return self.record(path)

    def write_table(self, name: str, table: np.ndarray, header: str) -> Path:
        path = self.path(name)
        np.savetxt(path, table, delimiter=',', header=header, comments='', fmt='%.12g')
        return self.record(path)

    def conclude(self, exit_code: ExitCode, status: Optional[str] = None):
        """Keep the most severe outcome seen so far."""
        if exit_code >= self.exit_code:
            self.exit_code = exit_code
            self.status = status or exit_code.name.lower()

    def write_manifest(self) -> Path:
        manifest = config_models.RunManifest(
            command=self.command,
            arguments=jsonable(self.arguments),
            inputs=[file_record(p) for p in self.inputs if p.exists()],
            artifacts=[file_record(p, self.directory) for p in self.artifacts if p.exists()],
            seed=self.seed,
            version=polystab.__version__,
            wall_time=time.perf_counter() - self._started,
            status=self.status,
            exit_code=int(self.exit_code),
        )
        path = self.path(config_constants.MANIFEST_NAME)
        path.write_text(manifest.model_dump_json(indent=2) + '\n', encoding='utf-8')
        return path


METHODS = ('model', 'data', 'previous-work')


def require_model(problem: Problem) -> PlantModel:
    if problem.plant is None:
        raise StructureError(f'problem {problem.name!r} has no model (plant.A1/A2/B2)')
    return problem.plant


def assemble_program(problem: Problem, method: str, settings: Optional[Solver] = None) -> SosProgram:
    """Build the SOS program ``method`` poses for ``problem``, after certifying the epsilons.

    ``data`` switches to the known-entries variant when the problem lists prior knowledge.
    """
    report, cfg = certify_epsilons(problem.epsilons, problem.structure, settings)
    report.require()
    if method == 'model':
        return assemble_theorem1(require_model(problem), problem.structure, cfg, problem.degrees)
    if method == 'previous-work':
        return assemble_previous_work(require_model(problem), problem.structure, cfg, problem.degrees)
    if problem.prior is not None and problem.prior.alpha:
        return assemble_prior(problem.shape, problem.structure, cfg, problem.data_matrices(), problem.noise(),
                              problem.prior, problem.degrees)
    return assemble_theorem2(problem.shape, problem.structure, cfg, problem.compatible_set(), problem.degrees)


def synthesize(problem: Problem, method: str, settings: Optional[Solver] = None) -> Certificate:
    if method == 'model':
        return synthesize_model(require_model(problem), problem.structure, problem.epsilons, problem.degrees,
                                settings)
    if method == 'data':
        return synthesize_data(problem.shape, problem.structure, problem.epsilons, problem.data_matrices(),
                               problem.noise(), problem.degrees, problem.prior, settings)
    validate_structure(problem.shape, problem.structure)
    solution = solve_program(assemble_program(problem, method, settings), settings)
    return Certificate.from_solution(method, solution)


def verification_reports(problem: Problem, certificate: Certificate, rng: np.random.Generator, sos: bool = False,
                         settings: Optional[Solver] = None, sos_tolerance: float = 1e-6) -> Dict[str, CheckReport]:
    """Grid checks on the plant (the true system for data-based certificates), sampled checks
    over compatible systems when the problem has data, and optionally SOS re-checks."""
    reports: Dict[str, CheckReport] = {}
    data_based = certificate.method in ('data', 'prior') or problem.plant is None
    plant = problem.closed_loop_plant if data_based else problem.plant
    if plant is not None:
        reports['grid'] = verify_certificate(plant, problem.structure, problem.epsilons, certificate, problem.grid)

    qmi = None
    if data_based and problem.dataset is not None:
        qmi = problem.compatible_set()
        reports['compatible'] = CheckReport([check_compatible_systems(
            problem.shape, problem.structure, problem.epsilons, certificate, qmi, rng, problem.prior,
            systems=config_constants.VERIFY_SYSTEMS, points=config_constants.VERIFY_POINTS,
        )])

    if sos:
        if data_based and problem.dataset is not None:
            reports['sos'] = check_data_conditions(problem.shape, problem.structure, problem.epsilons,
                                                   certificate.P, certificate.L, qmi, problem.prior, settings,
                                                   sos_tolerance)
        elif problem.plant is not None:
            reports['sos'] = check_model_conditions(problem.plant, problem.structure, problem.epsilons,
                                                    certificate.P, certificate.L, settings, sos_tolerance)
    return reports


def reports_passed(reports: Dict[str, CheckReport]) -> bool:
    return all(report.passed for report in reports.values())


def print_reports(reports: Dict[str, CheckReport]):
    for section, report in reports.items():
        for check in report.checks:
            print_status('INFO' if check.passed else 'WARNING', f'{section}: {check}')
