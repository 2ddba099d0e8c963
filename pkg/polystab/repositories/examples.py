"""Bundled example problems and the planar system whose Lyapunov function is not radially unbounded."""
from pathlib import Path

import numpy as np

from polystab.models.types import CheckReport, CheckResult
from polystab.poly import parse_polynomial
from polystab.poly.polynomial import Polynomial
from polystab.repositories.problems import Problem, load_problem
from polystab.synthesis.lyapunov import ControllerLyapunov

FIXTURES_DIR = Path(__file__).resolve().parent / 'fixtures'
EXAMPLES = ('ex1', 'ex2', 'ex3', 'ex4')


def example_path(name: str) -> Path:
    if name not in EXAMPLES:
        raise KeyError(f'unknown example {name!r}; choose one of {", ".join(EXAMPLES)}')
    return FIXTURES_DIR / f'{name}.yml'


def load_example(name: str) -> Problem:
    return load_problem(example_path(name))


class BoundedLyapunovSystem:
    """``x1' = -(x1 + x2)(1 + x1^2)^2``, ``x2' = x1 - x2``.

    ``V = x1^2 / (1 + x1^2) + x2^2`` is bounded along the x1 axis, yet
    ``V' = -2 x1^2 - 2 x2^2`` keeps a uniform floor away from the origin.
    """
    n = 2

    @staticmethod
    def field(t: float, x: np.ndarray) -> np.ndarray:
        x1, x2 = x
        return np.array([-(x1 + x2) * (1 + x1 ** 2) ** 2, x1 - x2])

    @staticmethod
    def value(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        x1, x2 = points[:, 0], points[:, 1]
        return x1 ** 2 / (1 + x1 ** 2) + x2 ** 2

    @staticmethod
    def gradient(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        x1, x2 = points[:, 0], points[:, 1]
        return np.column_stack([2 * x1 / (1 + x1 ** 2) ** 2, 2 * x2])

    @staticmethod
    def decay(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return -2 * np.einsum('ni,ni->n', points, points)


def _relative_gap(derived: Polynomial, printed: Polynomial) -> float:
    return derived.coefficient_gap(printed) / max(1.0, printed.max_coefficient())


def compare_with_reference(problem: Problem, controller: ControllerLyapunov, tolerance: float) -> CheckReport:
    """Coefficient comparison of ``det P``, ``eta`` and ``xi`` against the printed displays.

    Both sides are divided by the constant term of their ``det P`` first, so a
    certificate scaled by a positive factor still matches. Displays missing
    from the file are skipped.
    """
    reference = problem.spec.reference
    if reference is None or not controller.symbolic:
        return CheckReport()
    space = problem.space
    derived_scale = float(controller.det.constant_term())
    printed_det = parse_polynomial(reference.det, space) if reference.det is not None else controller.det
    printed_scale = float(printed_det.constant_term())

    pairs = []
    if reference.det is not None:
        pairs.append(('det', controller.det, printed_det))
    if reference.eta is not None:
        pairs.append(('eta', controller.eta, parse_polynomial(reference.eta, space)))
    if reference.xi is not None:
        for i, text in enumerate(reference.xi):
            pairs.append((f'xi[{i}]', controller.xi.entry(i, 0), parse_polynomial(text, space)))

    checks = []
    for name, derived, printed in pairs:
        gap = _relative_gap(derived.scale(1.0 / derived_scale), printed.scale(1.0 / printed_scale))
        checks.append(CheckResult(name, gap <= tolerance, gap, None, tolerance))
    return CheckReport(checks)
