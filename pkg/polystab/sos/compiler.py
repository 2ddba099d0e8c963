"""Compile SOS programs into equality-form SDPs and read the answers back.

A ``q x q`` constraint ``C`` is certified through ``z^T C z`` with a basis
that is linear in ``z``: element ``(i, m)`` stands for ``z_i * m``. Matching
coefficients of the scalar form is the same as matching, for every pair
``i <= j``, the coefficients of ``C_ij`` against the ``(i, j)`` sub-block of
the Gram matrix, which is what :func:`compile` does.
"""
import itertools
import logging
import math
import time
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from polystab.config import get_solver_settings
from polystab.config.models import Solver
from polystab.models.types import CheckResult, Objective, SolveStatus, VariableGroup
from polystab.poly.affine import AffineForm
from polystab.poly.matrix import PolynomialMatrix
from polystab.poly.polynomial import Monomial, Polynomial, grlex_key, mono_mul
from polystab.poly.space import VariableSpace
from polystab.sdp.program import ConicProgram, ConicSolution
from polystab.sdp.solver import solve
from polystab.sos.certificate import GramBasis, GramBlock, GramCertificate
from polystab.sos.program import SosConstraint, SosProgram
from polystab.utils.exceptions import DegreeMismatchError, InfeasibleError, SolverStatusError

logger = logging.getLogger(__name__)

MARGIN_FLOOR = -1e-7

_GROUPS = (VariableGroup.X1, VariableGroup.X2, VariableGroup.Y, VariableGroup.Z)


def _half_range(values) -> Tuple[int, int]:
    return math.ceil(min(values) / 2), max(values) // 2


def _block_basis(poly: Polynomial, prune: bool) -> Tuple[Monomial, ...]:
    support = poly.support
    if not support:
        return ()
    space = poly.space
    ranges = [range(lo, hi + 1) for lo, hi in (_half_range([m[k] for m in support]) for k in range(space.dim))]
    limits = []
    for group in _GROUPS:
        idx = space.group_indices(group)
        if idx:
            limits.append((idx, _half_range([sum(m[k] for k in idx) for m in support])))
    limits.append((tuple(range(space.dim)), _half_range([sum(m) for m in support])))

    basis = [
        m for m in itertools.product(*ranges)
        if all(lo <= sum(m[k] for k in idx) <= hi for idx, (lo, hi) in limits)
    ]
    basis.sort(key=grlex_key)
    while prune:
        products = Counter(mono_mul(a, b) for a in basis for b in basis)
        # a square no other pair reaches forces a zero Gram diagonal, hence a zero row
        dead = {a for a in basis if mono_mul(a, a) not in support and products[mono_mul(a, a)] == 1}
        if not dead:
            break
        basis = [m for m in basis if m not in dead]
    return tuple(basis)


def build_basis(constraint: SosConstraint, prune: bool = True) -> GramBasis:
    """Per-coordinate monomial bases for a constraint, graded-lex ordered.

    Block ``i`` is derived from the support of ``C_ii`` alone: every
    exponent, every variable-group degree and the total degree of a basis
    monomial lie in ``[ceil(min/2), floor(max/2)]`` of the support. With
    ``prune`` the basis is then reduced by the zero-diagonal argument.
    """
    matrix = constraint.matrix
    blocks = tuple(_block_basis(matrix.entry(i, i), prune) for i in range(matrix.rows))
    return GramBasis(matrix.space, blocks)


def scalarize_matrix_sos(constraint: SosConstraint) -> Tuple[Polynomial, VariableSpace]:
    """``z^T C z`` over the constraint space extended with ``z_1..z_q``; 1x1 constraints pass through."""
    matrix = constraint.matrix
    q = matrix.rows
    if q == 1:
        return matrix.entry(0, 0), matrix.space
    space = matrix.space.with_z(q)
    z = [Polynomial.variable(space, f'z_{k + 1}') for k in range(q)]
    total = Polynomial.zero(space)
    for i in range(q):
        for j in range(q):
            entry = matrix.entry(i, j)
            if not entry.is_zero:
                total = total + z[i] * z[j] * entry.lift(space)
    return total, space


def _split(coef) -> Tuple[float, Dict[int, float]]:
    if isinstance(coef, AffineForm):
        return coef.const, coef.coefs
    return float(coef), {}


def _monomial_text(space: VariableSpace, monomial: Monomial) -> str:
    return Polynomial.monomial(space, monomial).to_text()


def compile(program: SosProgram, margin_cap: Optional[float] = None) -> ConicProgram:
    """One PSD block per constraint, free variables for the unknown coefficients.

    Free variables hold the decision coefficients in declaration order,
    followed by the margin ``t`` when the program maximizes it. The margin
    is bounded by ``margin_cap`` (solver settings by default) through a 1x1
    slack block, so a strictly feasible program never becomes unbounded.
    """
    started = time.perf_counter()
    conic = ConicProgram(metadata={'label': program.label, 'constraints': [],
                                   'n_decisions': program.n_decision_vars, 'margin_var': None})
    placed: List[Tuple[SosConstraint, GramBasis, int]] = []
    for constraint in program.constraints:
        basis = build_basis(constraint)
        if basis.size == 0:
            for entry in constraint.matrix.entries:
                if not entry.is_zero:
                    raise DegreeMismatchError(_monomial_text(entry.space, entry.monomials()[0]), constraint.label)
            logger.debug(f"Constraint {constraint.label} is identically zero, skipping")
            continue
        block = conic.add_block(constraint.label, basis.size)
        placed.append((constraint, basis, block))
        conic.metadata['constraints'].append({'label': constraint.label, 'block': block, 'basis': basis})

    margin = program.objective is Objective.MAX_MARGIN
    cap_block = conic.add_block('margin_cap', 1) if margin else None
    conic.add_free(program.n_decision_vars)
    t_var = None
    if margin:
        t_var = conic.free_var(conic.add_free(1))
        conic.metadata['margin_var'] = program.n_decision_vars
    offsets = conic.block_offsets

    for constraint, basis, block in placed:
        _match_coefficients(conic, constraint, basis, block, offsets, t_var)

    if margin:
        cap = margin_cap if margin_cap is not None else program.margin_cap
        if cap is None:
            cap = get_solver_settings().margin_cap
        conic.add_row({conic.entry_var(cap_block, 0, 0, offsets): 1.0, t_var: 1.0}, cap)
        conic.objective = {t_var: -1.0}

    logger.info(f"Compiled SOS program {program.label}: {len(placed)} Gram blocks "
                f"(sizes {[b.size for _, b, _ in placed]}), {program.n_decision_vars} decision "
                f"coefficients, {conic.n_rows} equalities in {time.perf_counter() - started:.2f}s")
    return conic


def _match_coefficients(conic: ConicProgram, constraint: SosConstraint, basis: GramBasis,
                        block: int, offsets: List[int], t_var: Optional[int]):
    matrix = constraint.matrix
    starts = basis.offsets
    for i in range(matrix.rows):
        for j in range(i, matrix.rows):
            gram: Dict[Monomial, Dict[int, float]] = {}
            diagonal: Counter = Counter()
            for a, ma in enumerate(basis.blocks[i]):
                for b, mb in enumerate(basis.blocks[j]):
                    if i == j and b < a:
                        continue
                    ra, rb = starts[i] + a, starts[j] + b
                    var = conic.entry_var(block, ra, rb, offsets)
                    m = mono_mul(ma, mb)
                    row = gram.setdefault(m, {})
                    row[var] = row.get(var, 0.0) + (2.0 if ra != rb and i == j else 1.0)
                    if ra == rb:
                        diagonal[m] += 1
            entry = matrix.entry(i, j)
            for m in sorted(set(gram) | entry.support, key=grlex_key):
                const, decisions = _split(entry.coefficient(m))
                row = dict(gram.get(m, {}))
                if not row and not decisions:
                    raise DegreeMismatchError(_monomial_text(entry.space, m), constraint.label)
                if t_var is not None and diagonal[m]:
                    row[t_var] = float(diagonal[m])
                for k, v in decisions.items():
                    var = conic.free_var(k)
                    row[var] = row.get(var, 0.0) - v
                conic.add_row(row, const)


@dataclass
class SosSolution:
    status: SolveStatus
    values: np.ndarray
    decisions: Dict[str, PolynomialMatrix]
    certificate: GramCertificate
    margin: Optional[float]
    conic: ConicSolution

    def __getitem__(self, name: str) -> PolynomialMatrix:
        return self.decisions[name]


def extract_solution(program: SosProgram, conic: ConicProgram, solution: ConicSolution) -> SosSolution:
    """Substitute solved coefficients and rebuild a Gram certificate per constraint.

    Raises:
        InfeasibleError: the solver reported infeasibility, or the optimal
            margin is below ``MARGIN_FLOOR``.
        SolverStatusError: any other status without values.
    """
    if not solution.has_values:
        if solution.status is SolveStatus.INFEASIBLE:
            raise InfeasibleError(solution.status, f'SOS program {program.label} is infeasible')
        raise SolverStatusError(solution.status, f'SOS program {program.label}: solver status '
                                                 f'{solution.status} ({solution.message})')
    if solution.status is SolveStatus.INACCURATE:
        logger.warning(f"SOS program {program.label} solved inaccurately; certificate will be re-verified")

    n_dec = program.n_decision_vars
    values = np.asarray(solution.free[:n_dec], dtype=float)
    margin_var = conic.metadata.get('margin_var')
    margin = float(solution.free[margin_var]) if margin_var is not None else None
    if margin is not None and margin < MARGIN_FLOOR:
        raise InfeasibleError(SolveStatus.INFEASIBLE,
                              f'SOS program {program.label} is infeasible: best margin {margin:.3e}')

    decisions = {d.name: d.value(values).pruned() for d in program.decisions}
    certificate = GramCertificate()
    by_label = {c.label: c for c in program.constraints}
    for placed in conic.metadata['constraints']:
        constraint = by_label[placed['label']]
        gram = solution.blocks[placed['block']]
        if margin is not None:
            gram = gram + margin * np.eye(gram.shape[0])
        certificate.blocks.append(GramBlock.from_gram(
            constraint.label, constraint.matrix.substitute(values), placed['basis'], gram))
    logger.info(f"Extracted {len(program.decisions)} decisions from {program.label} "
                f"(status {solution.status}" + (f", margin {margin:.3e})" if margin is not None else ")"))
    return SosSolution(solution.status, values, decisions, certificate, margin, solution)


def solve_program(program: SosProgram, settings: Optional[Solver] = None) -> SosSolution:
    settings = settings or get_solver_settings()
    cap = program.margin_cap if program.margin_cap is not None else settings.margin_cap
    conic = compile(program, cap)
    return extract_solution(program, conic, solve(conic, settings))


def check_sos(matrix: PolynomialMatrix, label: str = 'check', settings: Optional[Solver] = None) -> SosSolution:
    """Certify a fixed (decision-free) symmetric polynomial matrix as SOS."""
    program = SosProgram(matrix.space, label)
    program.add_sos(label, matrix)
    program.maximize_margin()
    return solve_program(program, settings)


def sos_margin(matrix: PolynomialMatrix, label: str = 'check', settings: Optional[Solver] = None) -> float:
    """Largest ``t`` (up to the cap) such that ``C`` has a Gram matrix ``Q`` with ``Q - t I`` PSD.

    Negative when ``C`` is not SOS over its basis. Unlike :func:`check_sos`
    a negative margin is returned, not raised.

    Raises:
        SolverStatusError: the solver returned no values.
    """
    settings = settings or get_solver_settings()
    program = SosProgram(matrix.space, label)
    program.add_sos(label, matrix)
    program.maximize_margin()
    conic = compile(program, settings.margin_cap)
    solution = solve(conic, settings)
    if not solution.has_values:
        raise SolverStatusError(solution.status, f'SOS check {label}: solver status {solution.status}')
    return float(solution.free[conic.metadata['margin_var']])


def certify_fixed(label: str, matrix: PolynomialMatrix, settings: Optional[Solver] = None,
                  tolerance: float = 1e-6) -> CheckResult:
    """SOS check of a decision-free matrix as a report entry; passes when the margin is at least ``-tolerance``."""
    margin = sos_margin(matrix, label, settings)
    logger.info(f"SOS check {label}: margin {margin:.3e}")
    return CheckResult(label, margin >= -tolerance, margin, None, tolerance)
