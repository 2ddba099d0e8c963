import numpy as np
import pytest

from polystab.models.types import AssumptionCheck, ConditionStatus
from polystab.poly import Polynomial, PolynomialMatrix, parse_column, parse_matrix
from polystab.repositories.examples import compare_with_reference, load_example
from polystab.sos import monomials_up_to, verify_sos
from polystab.synthesis.model import (
    assemble_previous_work,
    assemble_theorem1,
    build_M,
    certify_epsilons,
    check_model_conditions,
    derive_decay_constants,
    extract_controller_lyapunov,
    synthesize_model,
    validate_structure,
    verify_certificate,
)
from polystab.synthesis.plant import StructureChoice
from polystab.utils.exceptions import EpsilonConditionError, StructureError


@pytest.fixture(scope='module')
def ex1():
    return load_example('ex1')


@pytest.fixture(scope='module')
def reference(ex1):
    return ex1.reference_certificate()


def test_structure_of_ex1(ex1):
    report = validate_structure(ex1.shape, ex1.structure)
    assert report.identity_ok
    assert report.assumption is AssumptionCheck.ANALYTIC


def test_structure_identity_failure_lists_rows(ex1):
    space = ex1.space
    structure = StructureChoice(parse_column(['x1', 'x2'], space), parse_matrix([['1', '0'], ['0', '1']], space))
    with pytest.raises(StructureError) as info:
        validate_structure(ex1.shape, structure)
    assert [row for row, _ in info.value.residuals] == [1]


def test_structure_requires_vanishing_Z(ex1):
    space = ex1.space
    structure = StructureChoice(parse_column(['x1', 'x2', 'x1 + 1'], space),
                                parse_matrix([['x1', '0', '0'], ['0', '1', '0']], space))
    with pytest.raises(StructureError, match=r'Z\(0\) must vanish'):
        validate_structure(ex1.shape, structure)


def test_reference_displays_match_exactly(ex1, reference):
    controller = extract_controller_lyapunov(reference, ex1.structure)
    report = compare_with_reference(ex1, controller, 1e-9)
    assert [c.name for c in report.checks] == ['det', 'eta', 'xi[0]']
    assert report.passed


def test_rational_and_numeric_forms_agree(ex1, reference):
    controller = extract_controller_lyapunov(reference, ex1.structure)
    points = np.random.default_rng(0).uniform(-3, 3, size=(200, 2))
    np.testing.assert_allclose(controller.value(points), controller.value_rational(points), rtol=1e-10)
    np.testing.assert_allclose(controller.control(points), controller.control_rational(points),
                               rtol=1e-9, atol=1e-9)


def test_derivative_along_closed_loop_is_minus_wMw(ex1, reference):
    controller = extract_controller_lyapunov(reference, ex1.structure)
    M = build_M(ex1.plant, ex1.structure, reference.P, reference.L)
    assert M.is_symmetric()
    points = np.random.default_rng(1).uniform(-3, 3, size=(100, 2))
    w = controller.solve_w(points)
    closed_form = -np.einsum('ni,nij,nj->n', w, M.evaluate_many(points), w)
    along = np.einsum('ni,ni->n', controller.gradient(points), controller.closed_loop(ex1.plant, points))
    np.testing.assert_allclose(along, closed_form, rtol=1e-9, atol=1e-9)


def test_reference_passes_grid_checks(ex1, reference):
    report = verify_certificate(ex1.plant, ex1.structure, ex1.epsilons, reference, ex1.grid)
    assert report.passed, [str(c) for c in report.failed]
    assert {c.name for c in report.checks} == {'P_positive', 'schur', 'decay', 'finite_difference', 'gradient'}


def test_derived_decay_constants(ex1):
    c, r = derive_decay_constants(ex1.epsilons, ex1.structure)
    assert r == 1.0
    assert c == pytest.approx(0.8 * 0.01 / 2.0)


def test_decay_constants_need_identity_Z():
    ex2 = load_example('ex2')
    structure = StructureChoice(parse_column(['x1', 'x2^3'], ex2.space),
                                parse_matrix([['1', '0'], ['0', '0'], ['x1', '0']], ex2.space))
    with pytest.raises(EpsilonConditionError):
        derive_decay_constants(ex2.epsilons, structure)


def test_program_layout(ex1):
    cfg = ex1.epsilons.with_decay(0.004, 1.0)
    program = assemble_theorem1(ex1.plant, ex1.structure, cfg, ex1.degrees)
    assert [c.label for c in program.constraints] == ['P_positive', 'decay']
    assert program.decision('P').size == 3 * 3
    assert program.decision('L').size == 2 * 10
    assert program.constraints[1].size == 4

    previous = assemble_previous_work(ex1.plant, ex1.structure, cfg, ex1.degrees)
    assert [c.label for c in previous.constraints] == ['P_positive', 'M_positive']


@pytest.mark.solver
def test_epsilons_of_ex1_are_certified(ex1):
    report, cfg = certify_epsilons(ex1.epsilons, ex1.structure)
    assert report.accepted
    assert report.eps2_positive is ConditionStatus.CERTIFIED
    assert cfg.c == pytest.approx(0.004)


@pytest.mark.solver
def test_reference_passes_sos_recheck(ex1, reference):
    report = check_model_conditions(ex1.plant, ex1.structure, ex1.epsilons, reference.P, reference.L)
    assert report.passed, [str(c) for c in report.failed]


@pytest.mark.solver
@pytest.mark.slow
def test_synthesis_for_ex1_verifies(ex1):
    certificate = synthesize_model(ex1.plant, ex1.structure, ex1.epsilons, ex1.degrees)
    assert certificate.method == 'model'
    assert certificate.diagnostics['margin'] > 0
    assert verify_sos(certificate.sos.certificate).passed
    report = verify_certificate(ex1.plant, ex1.structure, ex1.epsilons, certificate, ex1.grid)
    assert report.passed, [str(c) for c in report.failed]


def random_matrix(space, rows: int, cols: int, rng: np.random.Generator, symmetric: bool = False):
    def entry():
        monomials = monomials_up_to(space.dim, tuple(range(space.dim)), 2)
        return Polynomial(space, {m: rng.uniform(-1, 1) for m in monomials})
    if not symmetric:
        return PolynomialMatrix.from_rows(space, [[entry() for _ in range(cols)] for _ in range(rows)])
    upper = {(i, j): entry() for i in range(rows) for j in range(i, rows)}
    return PolynomialMatrix.from_rows(space, [[upper[min(i, j), max(i, j)] for j in range(rows)]
                                              for i in range(rows)])


def test_M_is_affine_in_P_and_L(ex1):
    space = ex1.space
    p, m = ex1.structure.p, ex1.shape.m
    rng = np.random.default_rng(3)
    for a in (0.3, -0.5, 2.0):
        b = 1.0 - a
        P1, P2 = (random_matrix(space, p, p, rng, symmetric=True) for _ in range(2))
        L1, L2 = (random_matrix(space, m, p, rng) for _ in range(2))
        combined = build_M(ex1.plant, ex1.structure, P1.scale(a) + P2.scale(b), L1.scale(a) + L2.scale(b))
        separate = (build_M(ex1.plant, ex1.structure, P1, L1).scale(a)
                    + build_M(ex1.plant, ex1.structure, P2, L2).scale(b))
        assert combined.shape == separate.shape
        for lhs, rhs in zip(combined.entries, separate.entries):
            assert lhs.coefficient_gap(rhs) <= 1e-12 * (1.0 + rhs.max_coefficient())
