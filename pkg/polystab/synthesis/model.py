"""Model-based synthesis: ``M(x)``, the epsilon conditions and the SOS program.

The program searches ``P(x1)`` (symmetric, ``P - eps1 I`` SOS) and ``L(x)``
such that ``[[M, eps2 P], [eps2 P, eps2 eps3 I]]`` is SOS. ``M`` is affine
in ``(P, L)``, so both constraints stay linear in the unknown coefficients.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from polystab.config import get_runtime_settings
from polystab.config.models import Solver
from polystab.models.types import (
    AssumptionCheck,
    CheckReport,
    CheckResult,
    ConditionStatus,
    ShapeKind,
    SolveStatus,
    VariableGroup,
)
from polystab.poly.matrix import PolynomialMatrix
from polystab.poly.polynomial import Polynomial
from polystab.sos.certificate import verify_sos
from polystab.sos.compiler import SosSolution, certify_fixed, solve_program
from polystab.sos.program import SosProgram
from polystab.synthesis.lyapunov import ControllerLyapunov
from polystab.synthesis.plant import (
    DegreeChoice,
    EpsilonConfig,
    PlantModel,
    PlantShape,
    StructureChoice,
    VerificationGrid,
)
from polystab.utils.exceptions import EpsilonConditionError, PolystabError, StructureError
from polystab.utils.executor import map_ordered

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-9
DELTA_FLOOR = 1e-6
DECAY_SAFETY = 0.8
SPHERE_SAMPLES = 1000
CHUNK_SIZE = 4096


@dataclass
class StructureReport:
    identity_ok: bool
    z_vanishes: bool
    assumption: AssumptionCheck
    residuals: List[Tuple[int, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'identity_ok': self.identity_ok,
            'z_vanishes': self.z_vanishes,
            'assumption': str(self.assumption),
            'residuals': [{'row': r, 'residual': t} for r, t in self.residuals],
        }


def _classify_assumption(structure: StructureChoice) -> AssumptionCheck:
    """ANALYTIC when every state variable has a pure-power entry ``c * x_k^e`` in ``Z``."""
    space = structure.space
    covered = set()
    for entry in structure.Z.entries:
        if len(entry) == 1:
            (monomial, _), = entry.items()
            powered = [k for k, e in enumerate(monomial) if e]
            if len(powered) == 1:
                covered.add(powered[0])
    if covered >= set(range(space.n)):
        return AssumptionCheck.ANALYTIC
    rng = np.random.default_rng(get_runtime_settings().seed)
    points = rng.uniform(-3.0, 3.0, size=(SPHERE_SAMPLES, space.dim))
    points = points[np.linalg.norm(points, axis=1) > 1e-3]
    norms = np.linalg.norm(structure.Z.evaluate_many(points)[:, :, 0], axis=1)
    return AssumptionCheck.SAMPLED if np.all(norms > 1e-12) else AssumptionCheck.VIOLATED


def validate_structure(shape: PlantShape, structure: StructureChoice) -> StructureReport:
    """Check ``F = H Z`` coefficient-wise and ``Z(0) = 0``; classify ``Z(x) = 0 iff x = 0``.

    Raises:
        StructureError: the identity fails (offending rows with their
            residual polynomials), ``Z(0) != 0``, or sampling finds a nonzero
            root of ``Z``.
    """
    shape.space.require_same(structure.space)
    if structure.H.rows != shape.f:
        raise StructureError(f'H has {structure.H.rows} rows, F has {shape.f}')
    residual = shape.F - structure.H @ structure.Z
    residuals = [(i + 1, e.to_text()) for i, e in enumerate(residual.entries)
                 if e.max_coefficient() > IDENTITY_TOL]
    if residuals:
        raise StructureError('F(x) != H(x) Z(x)', residuals)
    nonzero = [(i + 1, repr(float(e.constant_term()))) for i, e in enumerate(structure.Z.entries)
               if e.constant_term() != 0.0]
    if nonzero:
        raise StructureError('Z(0) must vanish', nonzero)
    assumption = _classify_assumption(structure)
    if assumption is AssumptionCheck.VIOLATED:
        raise StructureError('Z(x) vanishes at a nonzero sample point')
    logger.debug(f"Structure validated: p={structure.p}, assumption check {assumption}")
    return StructureReport(True, True, assumption)


def build_M(plant: PlantModel, structure: StructureChoice, P: PolynomialMatrix, L: PolynomialMatrix) -> PolynomialMatrix:
    """``-T - T^T + sum_i dP/dx1_i * (A1_i H Z)`` with ``T = dZ/dx [[A1, 0], [A2, B2]] [[H P], [G L]]``."""
    space = structure.space
    p = structure.p
    dZ = structure.Z.jacobian(VariableGroup.ALL)
    A = PolynomialMatrix.from_numeric(space, plant.A)
    B = PolynomialMatrix.from_numeric(space, plant.B)
    T = dZ @ (A @ structure.H @ P + B @ plant.shape.G @ L)
    full = -T - T.T
    HZ = structure.H @ structure.Z
    for i, k in enumerate(space.group_indices(VariableGroup.X1)):
        weight = (PolynomialMatrix.from_numeric(space, plant.A1[i:i + 1]) @ HZ).as_scalar()
        if not weight.is_zero:
            full = full + P.diff(k).scale(weight)
    return PolynomialMatrix.symmetric(space, p, lambda i, j: full.entry(i, j))


@dataclass
class EpsilonReport:
    eps2_positive: ConditionStatus
    eps3_positive: ConditionStatus
    decay: ConditionStatus
    c: Optional[float]
    r: Optional[float]
    details: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return all(s.accepted for s in (self.eps2_positive, self.eps3_positive, self.decay))

    def require(self):
        if not self.accepted:
            raise EpsilonConditionError(
                f'epsilon conditions rejected: eps2 {self.eps2_positive}, eps3 {self.eps3_positive}, '
                f'decay floor {self.decay}')

    def to_dict(self) -> dict:
        return {
            'eps2_positive': str(self.eps2_positive),
            'eps3_positive': str(self.eps3_positive),
            'decay': str(self.decay),
            'c': self.c,
            'r': self.r,
            **self.details,
        }


def _is_identity_Z(structure: StructureChoice) -> bool:
    space = structure.space
    return structure.p == space.n and all(
        structure.Z.entry(k, 0) == Polynomial.variable(space, k) for k in range(space.n))


def derive_decay_constants(cfg: EpsilonConfig, structure: StructureChoice, r: float = 1.0) -> Tuple[float, float]:
    """``(c, r)`` for ``Z = x``, constant ``eps2`` and ``eps3 = a + x^T Q x``.

    On ``||x|| >= r`` the ratio ``eps2 ||x||^2 / eps3`` is smallest on the
    sphere, where it is at least ``eps2 r^2 / (a + r^2 lambda_max(Q))``; the
    returned ``c`` is that bound times ``DECAY_SAFETY``.
    """
    space = structure.space
    eps3 = cfg.eps3
    if not (_is_identity_Z(structure) and cfg.eps2.is_constant and eps3.degree <= 2):
        raise EpsilonConditionError('c and r can only be derived for Z = x, constant eps2 and quadratic eps3; '
                                    'set epsilons.c and epsilons.r')
    if any(sum(m) == 1 for m in eps3.support):
        raise EpsilonConditionError('c and r can only be derived when eps3 has no linear terms')
    a = float(eps3.constant_term())
    Q = np.zeros((space.n, space.n))
    for monomial, coef in eps3.items():
        powered = [k for k, e in enumerate(monomial) for _ in range(e)]
        if len(powered) == 2:
            i, j = powered
            if i == j:
                Q[i, i] += coef
            else:
                Q[i, j] += coef / 2
                Q[j, i] += coef / 2
    top = a + r * r * float(np.linalg.eigvalsh(Q).max())
    eps2 = float(cfg.eps2.constant_term())
    if a <= 0 or top <= 0 or eps2 <= 0:
        raise EpsilonConditionError('eps2 and eps3 must be positive to derive c and r')
    return DECAY_SAFETY * eps2 * r * r / top, r


def _positive_with_floor(poly: Polynomial, floor: Optional[Polynomial], label: str,
                         settings: Optional[Solver]) -> ConditionStatus:
    """Sign check for constants; otherwise ``poly - delta * floor`` SOS with ``delta >= DELTA_FLOOR``."""
    if poly.is_constant:
        return ConditionStatus.CERTIFIED if float(poly.constant_term()) > 0 else ConditionStatus.REJECTED
    space = poly.space
    program = SosProgram(space, label)
    delta = program.new_decision('delta', ShapeKind.SCALAR, degree=0).matrix.entry(0, 0)
    floor = floor if floor is not None else Polynomial.constant(space, 1.0)
    program.add_sos(f'{label}_delta', delta - DELTA_FLOOR)
    program.add_sos(label, poly - delta * floor)
    program.maximize_margin()
    try:
        solve_program(program, settings)
    except PolystabError as e:
        logger.info(f"Could not certify {label}: {e}")
        return ConditionStatus.REJECTED
    return ConditionStatus.CERTIFIED


def _decay_by_s_procedure(cfg: EpsilonConfig, ZZ: Polynomial, settings: Optional[Solver]) -> bool:
    space = ZZ.space
    target = cfg.eps2 * ZZ - cfg.eps3.scale(cfg.c)
    degree = max(target.degree, 2) - 2
    degree -= degree % 2
    program = SosProgram(space, 'decay_floor')
    sigma = program.new_decision('sigma', ShapeKind.SCALAR, degree=degree)
    s = sigma.matrix.entry(0, 0)
    ball = Polynomial.zero(space) - cfg.r * cfg.r
    for k in range(space.n):
        ball = ball + Polynomial.variable(space, k) ** 2
    program.add_sos('multiplier', sigma.matrix)
    program.add_sos('decay_floor', target - s * ball)
    program.maximize_margin()
    try:
        solve_program(program, settings)
    except PolystabError as e:
        logger.info(f"S-procedure for the decay floor failed: {e}")
        return False
    return True


def _decay_by_sampling(cfg: EpsilonConfig, ZZ: Polynomial) -> Tuple[bool, float]:
    space = ZZ.space
    rng = np.random.default_rng(get_runtime_settings().seed)
    worst = np.inf
    for scale in (1, 2, 4, 8):
        directions = rng.standard_normal((SPHERE_SAMPLES, space.dim))
        points = cfg.r * scale * directions / np.linalg.norm(directions, axis=1, keepdims=True)
        eps3 = cfg.eps3.evaluate_many(points)
        if np.any(eps3 <= 0):
            return False, -np.inf
        ratio = cfg.eps2.evaluate_many(points) * ZZ.evaluate_many(points) / eps3
        worst = min(worst, float(ratio.min()))
    return worst >= cfg.c, worst


def certify_epsilons(cfg: EpsilonConfig, structure: StructureChoice,
                     settings: Optional[Solver] = None) -> Tuple[EpsilonReport, EpsilonConfig]:
    """Certify ``eps2 > 0`` off the origin, ``eps3 > 0``, and the decay floor on ``||x|| >= r``.

    Missing ``c``/``r`` are derived with :func:`derive_decay_constants`.
    The decay floor is certified by an S-procedure and, failing that,
    checked on sampled spheres of radius ``r, 2r, 4r, 8r`` (SAMPLED_ONLY).

    Returns:
        The report and the configuration with ``c`` and ``r`` filled in.
    """
    started = time.perf_counter()
    if cfg.c is None or cfg.r is None:
        c, r = derive_decay_constants(cfg, structure)
        cfg = cfg.with_decay(c, r)
        logger.info(f"Derived decay constants c={c:.6g}, r={r:.6g}")
    ZZ = (structure.Z.T @ structure.Z).as_scalar()
    eps2 = _positive_with_floor(cfg.eps2, ZZ, 'eps2_positive', settings)
    eps3 = _positive_with_floor(cfg.eps3, None, 'eps3_positive', settings)
    details = {}
    if not (eps2.accepted and eps3.accepted):
        decay = ConditionStatus.REJECTED
    elif _decay_by_s_procedure(cfg, ZZ, settings):
        decay = ConditionStatus.CERTIFIED
    else:
        ok, worst = _decay_by_sampling(cfg, ZZ)
        decay = ConditionStatus.SAMPLED_ONLY if ok else ConditionStatus.REJECTED
        details['sampled_min_ratio'] = worst
        if ok:
            logger.warning(f"Decay floor c={cfg.c:.6g} holds on samples only (min ratio {worst:.6g})")
    report = EpsilonReport(eps2, eps3, decay, cfg.c, cfg.r, details)
    logger.info(f"Epsilon conditions: eps2 {eps2}, eps3 {eps3}, decay floor {decay} "
                f"({time.perf_counter() - started:.2f}s)")
    return report, cfg


def declare_P_L(program: SosProgram, shape: PlantShape, structure: StructureChoice,
                degrees: DegreeChoice) -> Tuple[PolynomialMatrix, PolynomialMatrix]:
    space = program.space
    p_vars = degrees.P_variables if degrees.P_variables is not None else space.x1
    P = program.new_decision('P', ShapeKind.SYMMETRIC, structure.p, structure.p,
                             variables=p_vars, degree=degrees.P, even_only=degrees.P_even)
    L = program.new_decision('L', ShapeKind.RECTANGULAR, shape.m, structure.p,
                             variables=space.x1 + space.x2, degree=degrees.L)
    return P.matrix, L.matrix


def assemble_theorem1(plant: PlantModel, structure: StructureChoice, cfg: EpsilonConfig,
                      degrees: DegreeChoice) -> SosProgram:
    space = structure.space
    p = structure.p
    program = SosProgram(space, 'model_based')
    P, L = declare_P_L(program, plant.shape, structure, degrees)
    program.add_sos('P_positive', P - PolynomialMatrix.identity(space, p, cfg.eps1),
                    (VariableGroup.X1,))
    program.add_sos('decay', decay_block(plant, structure, cfg, P, L))
    program.maximize_margin()
    return program


def assemble_previous_work(plant: PlantModel, structure: StructureChoice, cfg: EpsilonConfig,
                           degrees: DegreeChoice) -> SosProgram:
    """Earlier conditions ``P - eps1 I`` SOS and ``M - eps2 I`` SOS; only locally conclusive for non-constant P."""
    space = structure.space
    p = structure.p
    program = SosProgram(space, 'previous_work')
    P, L = declare_P_L(program, plant.shape, structure, degrees)
    program.add_sos('P_positive', P - PolynomialMatrix.identity(space, p, cfg.eps1), (VariableGroup.X1,))
    M = build_M(plant, structure, P, L)
    program.add_sos('M_positive', M - PolynomialMatrix.identity(space, p, cfg.eps2))
    program.maximize_margin()
    return program


def decay_block(plant: PlantModel, structure: StructureChoice, cfg: EpsilonConfig,
                P: PolynomialMatrix, L: PolynomialMatrix) -> PolynomialMatrix:
    space = structure.space
    eps2P = P.scale(cfg.eps2)
    corner = PolynomialMatrix.identity(space, structure.p, cfg.eps2 * cfg.eps3)
    return PolynomialMatrix.block([[build_M(plant, structure, P, L), eps2P], [eps2P, corner]])


def check_model_conditions(plant: PlantModel, structure: StructureChoice, cfg: EpsilonConfig,
                           P: PolynomialMatrix, L: PolynomialMatrix, settings: Optional[Solver] = None,
                           tolerance: float = 1e-6) -> CheckReport:
    """SOS re-check of the P and decay conditions for a fixed ``P`` and ``L``."""
    p = structure.p
    return CheckReport([
        certify_fixed('P_positive', P - PolynomialMatrix.identity(structure.space, p, cfg.eps1), settings, tolerance),
        certify_fixed('decay', decay_block(plant, structure, cfg, P, L), settings, tolerance),
    ])


@dataclass
class Certificate:
    method: str
    P: PolynomialMatrix
    L: PolynomialMatrix
    status: SolveStatus = SolveStatus.FEASIBLE
    sos: Optional[SosSolution] = None
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def from_solution(cls, method: str, solution: SosSolution, **diagnostics) -> 'Certificate':
        report = verify_sos(solution.certificate)
        diagnostics = {
            'margin': solution.margin,
            'solve_time': solution.conic.solve_time,
            'solver': solution.conic.solver,
            'sos': report.to_dict(),
            **diagnostics,
        }
        return cls(method, solution['P'], solution['L'], solution.status, solution, diagnostics)


def extract_controller_lyapunov(certificate: Certificate, structure: StructureChoice) -> ControllerLyapunov:
    return ControllerLyapunov(structure, certificate.P, certificate.L)


def synthesize_model(plant: PlantModel, structure: StructureChoice, cfg: EpsilonConfig,
                     degrees: DegreeChoice, settings: Optional[Solver] = None) -> Certificate:
    started = time.perf_counter()
    validate_structure(plant.shape, structure)
    report, cfg = certify_epsilons(cfg, structure, settings)
    report.require()
    program = assemble_theorem1(plant, structure, cfg, degrees)
    solution = solve_program(program, settings)
    return Certificate.from_solution('model', solution, epsilons=report.to_dict(),
                                     wall_time=time.perf_counter() - started)


def _chunk_checks(args):
    plant, structure, cfg, controller, M, points = args
    P = controller.P.evaluate_many(points)
    p = P.shape[1]
    e2 = cfg.eps2.evaluate_many(points)
    e3 = cfg.eps3.evaluate_many(points)
    ratio = e2 / e3
    p_margin = np.linalg.eigvalsh(P - cfg.eps1 * np.eye(p)).min(axis=1)
    Mv = M.evaluate_many(points)
    schur = np.linalg.eigvalsh(Mv - ratio[:, None, None] * (P @ P)).min(axis=1)

    Z = structure.Z.evaluate_many(points)[:, :, 0]
    w = np.linalg.solve(P, Z[:, :, None])[:, :, 0]
    closed_form = -np.einsum('ni,nij,nj->n', w, Mv, w)
    decay = closed_form + ratio * np.einsum('ni,ni->n', Z, Z)

    f = controller.closed_loop(plant, points)
    h = 1e-6
    fd = (controller.value(points + h * f) - controller.value(points - h * f)) / (2 * h)
    gradient = np.einsum('ni,ni->n', controller.gradient(points), f)
    scale = 1.0 + np.abs(closed_form)
    return p_margin, schur, decay, np.abs(fd - closed_form) / scale, np.abs(gradient - closed_form) / scale


def _worst(name: str, values: np.ndarray, points: np.ndarray, tolerance: float, upper: bool) -> CheckResult:
    idx = int(np.argmax(values) if upper else np.argmin(values))
    value = float(values[idx])
    passed = value <= tolerance if upper else value >= -tolerance
    return CheckResult(name, passed, value, tuple(float(v) for v in points[idx]), tolerance)


def verify_certificate(plant: PlantModel, structure: StructureChoice, cfg: EpsilonConfig,
                       certificate: Certificate, grid: VerificationGrid = VerificationGrid()) -> CheckReport:
    """Pointwise checks of a certificate on a tensor grid over the state space.

    Checks: ``P - eps1 I >= -1e-7``; ``M - (eps2/eps3) P^2 >= -1e-6``;
    ``V' + (eps2/eps3) Z^T Z <= 1e-6`` with ``V'`` from the closed form
    ``-w^T M w``; and agreement (1e-4, relative) of that closed form with a
    central difference of ``V`` along ``f`` and with the exact gradient.
    """
    started = time.perf_counter()
    points = grid.points_for(structure.space.n)
    controller = extract_controller_lyapunov(certificate, structure)
    M = build_M(plant, structure, certificate.P, certificate.L)
    chunks = [points[i:i + CHUNK_SIZE] for i in range(0, len(points), CHUNK_SIZE)]
    results = map_ordered(_chunk_checks, [(plant, structure, cfg, controller, M, c) for c in chunks])
    merged = [np.concatenate(parts) for parts in zip(*results)]
    p_margin, schur, decay, fd_gap, grad_gap = merged
    report = CheckReport([
        _worst('P_positive', p_margin, points, 1e-7, upper=False),
        _worst('schur', schur, points, 1e-6, upper=False),
        _worst('decay', decay, points, 1e-6, upper=True),
        _worst('finite_difference', fd_gap, points, 1e-4, upper=True),
        _worst('gradient', grad_gap, points, 1e-4, upper=True),
    ])
    logger.info(f"Verified certificate on {len(points)} grid points in {time.perf_counter() - started:.2f}s: "
                f"{'pass' if report.passed else 'FAIL ' + ', '.join(c.name for c in report.failed)}")
    return report
