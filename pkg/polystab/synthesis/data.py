"""Data-based synthesis: one controller for every system compatible with the data.

``y^T M(x) y`` is linear in the parameter vector ``v``: it equals
``R(x, y)^T v``. Requiring ``R^T v >= (eps2/eps3) y^T P^2 y`` over the whole
compatible set is turned into a single block-matrix SOS condition through the
exact S-lemma for a linear inequality over a quadratic set, so no multiplier
is introduced.
"""
import logging
import time
from typing import List, Optional, Sequence

import numpy as np

from polystab.config.models import Solver
from polystab.models.types import CheckReport, CheckResult, VariableGroup
from polystab.poly.matrix import PolynomialMatrix
from polystab.poly.polynomial import Polynomial
from polystab.sos.compiler import certify_fixed, solve_program
from polystab.sos.program import SosProgram
from polystab.synthesis.model import Certificate, certify_epsilons, declare_P_L, validate_structure
from polystab.synthesis.plant import DegreeChoice, EpsilonConfig, PlantShape, StructureChoice
from polystab.synthesis.qmi import (
    DataMatrices,
    NoiseBound,
    PriorKnowledge,
    QmiSet,
    build_prior_qmi,
    build_qmi,
    index_to_entry,
    prior_residual,
    sample_compatible,
)
from polystab.utils.exceptions import DimensionMismatchError, QmiError

logger = logging.getLogger(__name__)


def y_column(space) -> PolynomialMatrix:
    return PolynomialMatrix.column(space, [Polynomial.variable(space, name) for name in space.y])


def build_R(shape: PlantShape, structure: StructureChoice, P: PolynomialMatrix, L: PolynomialMatrix) -> PolynomialMatrix:
    """``R(x, y)`` with ``R^T v = y^T M(x) y``; an ``ell x 1`` column over ``(x, y)``.

    The three blocks pair with the entries of ``A1``, ``A2`` and ``B2`` in
    row-major order. ``P`` and ``L`` may live on the state space or on the
    state space extended by ``y_1..y_p``.
    """
    p = structure.p
    space = P.space if P.space.y else P.space.with_y(p)
    if len(space.y) != p:
        raise DimensionMismatchError(f'space carries {len(space.y)} y-variables, structure needs {p}')
    P, L = P.lift(space), L.lift(space)
    Z, H = structure.Z.lift(space), structure.H.lift(space)
    F, G = shape.F.lift(space), shape.G.lift(space)
    y = y_column(space)
    Py = P @ y
    HPy = H @ Py
    GLy = G @ (L @ y)

    parts: List[PolynomialMatrix] = []
    if shape.n1:
        yPy = (y.T @ Py).as_scalar()
        grad = PolynomialMatrix.column(space, [yPy.diff(k) for k in space.group_indices(VariableGroup.X1)])
        w1 = Z.jacobian(VariableGroup.X1).T @ y
        parts.append(grad.kron(F) - w1.kron(HPy).scale(2.0))
    w2 = Z.jacobian(VariableGroup.X2).T @ y
    parts.append(w2.kron(HPy).scale(-2.0))
    parts.append(w2.kron(GLy).scale(-2.0))
    return PolynomialMatrix.column(space, [e for part in parts for e in part.entries])


def data_block_matrix(shape: PlantShape, structure: StructureChoice, cfg: EpsilonConfig,
                      P: PolynomialMatrix, L: PolynomialMatrix, qmi: Optional[QmiSet],
                      prior: Optional[PriorKnowledge] = None) -> PolynomialMatrix:
    """The ``(1 + gamma + p)`` block matrix whose SOS-ness certifies every compatible system.

    With ``a = R_u^T c + R_k^T v_k`` (unknown entries against the set's
    center, known entries against their values) the matrix is
    ``[[a, s^(1/2) R_u^T, eps2 y^T P], [s^(1/2) R_u, a (-N22), 0], [eps2 P y, 0, eps2 eps3 I / 2]]``.
    Without prior knowledge every entry is unknown. When every entry is
    known (``qmi`` is ``None``) the middle row and column vanish.
    """
    R = build_R(shape, structure, P, L)
    space = R.space
    ell = R.rows
    prior = prior if prior is not None else PriorKnowledge(ell)
    if prior.ell != ell:
        raise DimensionMismatchError(f'prior knowledge is for ell={prior.ell}, plant has ell={ell}')
    unknown = [k - 1 for k in prior.alpha_hat]
    known = [k - 1 for k in prior.alpha]
    if unknown and qmi is None:
        raise QmiError('unknown parameters need a compatible set')
    if qmi is not None and qmi.ell != len(unknown):
        raise DimensionMismatchError(f'compatible set has dimension {qmi.ell}, {len(unknown)} entries are unknown')

    a = Polynomial.zero(space)
    if unknown:
        for k, c in zip(unknown, qmi.center):
            a = a + R.entry(k, 0).scale(float(c))
    for k, value in zip(known, prior.v_alpha):
        a = a + R.entry(k, 0).scale(float(value))

    p = structure.p
    eps2 = cfg.eps2.lift(space)
    eps3 = cfg.eps3.lift(space)
    eps2Py = (P.lift(space) @ y_column(space)).scale(eps2)
    corner = PolynomialMatrix.identity(space, p, (eps2 * eps3).scale(0.5))
    top = PolynomialMatrix(space, 1, 1, [a])
    if not unknown:
        return PolynomialMatrix.block([[top, eps2Py.T], [eps2Py, corner]])

    gamma = len(unknown)
    root = qmi.schur_sqrt
    R_u = PolynomialMatrix.column(space, [R.entry(k, 0).scale(root) for k in unknown])
    negN22 = -qmi.N22
    middle = PolynomialMatrix.symmetric(space, gamma, lambda i, j: a.scale(float(negN22[i, j])))
    gap = PolynomialMatrix.zeros(space, gamma, p)
    return PolynomialMatrix.block([
        [top, R_u.T, eps2Py.T],
        [R_u, middle, gap],
        [eps2Py, gap.T, corner],
    ])


def _assemble(shape: PlantShape, structure: StructureChoice, cfg: EpsilonConfig, degrees: DegreeChoice,
              qmi: Optional[QmiSet], prior: Optional[PriorKnowledge], label: str) -> SosProgram:
    space = shape.space.with_y(structure.p)
    program = SosProgram(space, label)
    P, L = declare_P_L(program, shape, structure, degrees)
    program.add_sos('P_positive', P - PolynomialMatrix.identity(space, structure.p, cfg.eps1),
                    (VariableGroup.X1,))
    program.add_sos('data', data_block_matrix(shape, structure, cfg, P, L, qmi, prior),
                    (VariableGroup.ALL, VariableGroup.Y))
    program.maximize_margin()
    return program


def assemble_theorem2(shape: PlantShape, structure: StructureChoice, cfg: EpsilonConfig, qmi: QmiSet,
                      degrees: DegreeChoice) -> SosProgram:
    return _assemble(shape, structure, cfg, degrees, qmi, None, 'data_based')


def assemble_prior(shape: PlantShape, structure: StructureChoice, cfg: EpsilonConfig, data: DataMatrices,
                   noise: NoiseBound, prior: PriorKnowledge, degrees: DegreeChoice) -> SosProgram:
    """Data-based program over the systems that also match the known entries.

    Raises:
        QmiError: every entry is known and the known system does not
            explain the data within the noise bound.
    """
    qmi = build_prior_qmi(data, noise, prior)
    if qmi is None:
        slack = prior_residual(data, noise, prior)
        if slack < 0:
            raise QmiError(f'the known system violates the noise bound by {-slack:.3e}')
    return _assemble(shape, structure, cfg, degrees, qmi, prior, 'data_based')


def synthesize_data(shape: PlantShape, structure: StructureChoice, cfg: EpsilonConfig, data: DataMatrices,
                    noise: NoiseBound, degrees: DegreeChoice, prior: Optional[PriorKnowledge] = None,
                    settings: Optional[Solver] = None) -> Certificate:
    """Validate, certify the epsilons, build the compatible set and solve.

    Returns:
        A :class:`Certificate` with method ``data`` (or ``prior`` when known
        entries are given) and the set's diagnostics.
    """
    started = time.perf_counter()
    validate_structure(shape, structure)
    report, cfg = certify_epsilons(cfg, structure, settings)
    report.require()
    if prior is not None and prior.alpha:
        qmi = build_prior_qmi(data, noise, prior)
        program = assemble_prior(shape, structure, cfg, data, noise, prior, degrees)
        method = 'prior'
    else:
        qmi = build_qmi(data, noise)
        program = assemble_theorem2(shape, structure, cfg, qmi, degrees)
        method = 'data'
    solution = solve_program(program, settings)
    certificate = Certificate.from_solution(method, solution, epsilons=report.to_dict(),
                                            qmi=qmi.to_dict() if qmi is not None else None,
                                            wall_time=time.perf_counter() - started)
    certificate.P = certificate.P.project(shape.space)
    certificate.L = certificate.L.project(shape.space)
    return certificate


def check_data_conditions(shape: PlantShape, structure: StructureChoice, cfg: EpsilonConfig,
                          P: PolynomialMatrix, L: PolynomialMatrix, qmi: Optional[QmiSet],
                          prior: Optional[PriorKnowledge] = None, settings: Optional[Solver] = None,
                          tolerance: float = 1e-6) -> CheckReport:
    """SOS re-check of the P condition and the data block matrix for a fixed ``P`` and ``L``."""
    p = structure.p
    return CheckReport([
        certify_fixed('P_positive', P - PolynomialMatrix.identity(P.space, p, cfg.eps1), settings, tolerance),
        certify_fixed('data', data_block_matrix(shape, structure, cfg, P, L, qmi, prior), settings, tolerance),
    ])


def check_compatible_systems(shape: PlantShape, structure: StructureChoice, cfg: EpsilonConfig,
                             certificate: Certificate, qmi: Optional[QmiSet], rng: np.random.Generator,
                             prior: Optional[PriorKnowledge] = None, systems: int = 1000,
                             points: int = 200, box: float = 3.0, tol: float = 1e-7) -> CheckResult:
    """Sampled check of ``y^T M y >= (eps2/eps3) y^T P^2 y`` over compatible systems.

    Parameter vectors are drawn uniformly from the compatible set (combined
    with the known entries), points ``(x, y)`` uniformly from a box. The
    worst value is the smallest gap, relative to ``1 + |y^T M y|``.
    """
    R = build_R(shape, structure, certificate.P, certificate.L)
    space = R.space
    prior = prior if prior is not None else PriorKnowledge(R.rows)
    draws = sample_compatible(qmi, systems, rng) if qmi is not None else np.zeros((systems, 0))
    vs = np.array([prior.combine(d) for d in draws])
    xy = rng.uniform(-box, box, size=(points, space.dim))
    Rv = R.evaluate_many(xy)[:, :, 0] @ vs.T
    P = certificate.P.lift(space).evaluate_many(xy)
    y = xy[:, list(space.group_indices(VariableGroup.Y))]
    Py = np.einsum('nij,nj->ni', P, y)
    ratio = cfg.eps2.lift(space).evaluate_many(xy) / cfg.eps3.lift(space).evaluate_many(xy)
    floor = ratio * np.einsum('ni,ni->n', Py, Py)
    gap = (Rv - floor[:, None]) / (1.0 + np.abs(Rv))
    idx = np.unravel_index(int(np.argmin(gap)), gap.shape)
    worst = float(gap[idx])
    logger.info(f"Checked {systems} compatible systems at {points} points: worst relative gap {worst:.3e}")
    return CheckResult('compatible_systems', worst >= -tol, worst, tuple(float(v) for v in xy[idx[0]]), tol,
                       {'systems': systems, 'points': points})


def parameter_labels(shape: PlantShape, indices: Sequence[int]) -> List[str]:
    return [f'{which}({row},{col})' for which, row, col in (index_to_entry(k, shape) for k in indices)]
