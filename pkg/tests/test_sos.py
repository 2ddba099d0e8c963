import numpy as np
import pytest

from polystab.models.types import ShapeKind
from polystab.poly import parse_matrix, parse_polynomial
from polystab.poly.matrix import PolynomialMatrix
from polystab.poly.space import VariableSpace
from polystab.sos import (
    SosConstraint,
    SosProgram,
    build_basis,
    certify_fixed,
    check_sos,
    compile,
    monomials_up_to,
    scalarize_matrix_sos,
    solve_program,
    sos_margin,
    verify_sos,
)
from polystab.utils.exceptions import DegreeMismatchError, InfeasibleError, NonAffineError, NotSymmetricError

SPACE = VariableSpace(x1=('x1',), x2=('x2',))


def scalar(text: str) -> PolynomialMatrix:
    return PolynomialMatrix(SPACE, 1, 1, [parse_polynomial(text, SPACE)])


def test_monomials_up_to():
    found = monomials_up_to(2, (0, 1), 2)
    assert len(found) == 6
    assert found[0] == (0, 0)
    assert monomials_up_to(2, (0,), 4, even_only=True) == [(0, 0), (2, 0), (4, 0)]


def test_basis_is_pruned_by_zero_diagonal():
    constraint = SosConstraint('p', scalar('x1^4 + x2^2'))
    assert build_basis(constraint, prune=False).size == 4
    assert build_basis(constraint).to_text() == ['x2', 'x1^2']


def test_matrix_basis_has_one_block_per_row():
    constraint = SosConstraint('C', parse_matrix([['1 + x1^2', 'x1'], ['x1', '1']], SPACE))
    basis = build_basis(constraint)
    assert len(basis.blocks) == 2
    assert basis.to_text() == ['z_1', 'x1*z_1', 'z_2']


def test_scalarization():
    constraint = SosConstraint('C', parse_matrix([['1', 'x1'], ['x1', '2']], SPACE))
    form, space = scalarize_matrix_sos(constraint)
    assert space.z == ('z_1', 'z_2')
    assert form == parse_polynomial('z_1^2 + 2*x1*z_1*z_2 + 2*z_2^2', space)


def test_constraint_must_be_symmetric():
    with pytest.raises(NotSymmetricError):
        SosConstraint('C', parse_matrix([['1', 'x1'], ['0', '1']], SPACE))


def test_products_of_unknowns_are_rejected():
    program = SosProgram(SPACE)
    a = program.new_decision('a', ShapeKind.SCALAR, degree=1).matrix.entry(0, 0)
    with pytest.raises(NonAffineError):
        a * a


def test_unreachable_off_diagonal_raises():
    program = SosProgram(SPACE)
    program.add_sos('C', parse_matrix([['0', 'x1'], ['x1', '0']], SPACE))
    with pytest.raises(DegreeMismatchError):
        compile(program)


def test_compile_layout():
    program = SosProgram(SPACE, 'toy')
    program.add_sos('p', scalar('1 + x1^2 + x2^2 + x1^4'))
    program.maximize_margin()
    conic = compile(program, margin_cap=1e-3)
    assert [b.label for b in conic.blocks] == ['p', 'margin_cap']
    assert conic.blocks[0].size == 4
    assert conic.metadata['margin_var'] == 0
    assert conic.n_free == 1


@pytest.mark.solver
def test_check_sos_certifies_positive_polynomial():
    solution = check_sos(scalar('1 + x1^2 + x2^2 + x1^4'))
    report = verify_sos(solution.certificate)
    assert report.passed
    assert solution.margin > 0


@pytest.mark.solver
def test_check_sos_certifies_matrix():
    """[[1 + x1^2, x1], [x1, 1]] = z1^2 + (x1 z1 + z2)^2 in scalarized form."""
    solution = check_sos(parse_matrix([['1 + x1^2', 'x1'], ['x1', '1']], SPACE))
    assert verify_sos(solution.certificate).passed


@pytest.mark.solver
def test_indefinite_polynomial_is_rejected():
    matrix = scalar('x1^2 - x2^2')
    with pytest.raises(InfeasibleError):
        check_sos(matrix)
    assert sos_margin(matrix) == pytest.approx(-1.0, abs=1e-5)
    result = certify_fixed('indefinite', matrix)
    assert not result.passed


@pytest.mark.solver
def test_solve_program_recovers_decisions():
    """x1^4 + a x1^2 + 1 is SOS exactly when a >= -2."""
    program = SosProgram(SPACE, 'toy')
    a = program.new_decision('a', ShapeKind.SCALAR, variables=('x1',), degree=0)
    x1 = parse_polynomial('x1', SPACE)
    program.add_sos('p', x1 ** 4 + a.matrix.entry(0, 0) * x1 ** 2 + 1.0)
    program.maximize_margin()
    solution = solve_program(program)
    value = solution['a'].entry(0, 0)
    assert value.is_numeric
    assert value.constant_term() >= -2.0
    assert verify_sos(solution.certificate).passed

    points = np.column_stack([np.linspace(-3, 3, 61), np.zeros(61)])
    fixed = x1 ** 4 + value * x1 ** 2 + 1.0
    assert fixed.evaluate_many(points).min() >= -1e-8


KNOWN_SOS = [
    ('(x1 - x2)^2', 1),
    ('(x1 + 2*x2 - 1)^2', 1),
    ('(x1^2 - x2)^2', 2),
    ('(x1*x2 - 1)^2 + (x1 - x2)^2', 2),
    ('(x1^2 + x2^2 - 1)^2', 2),
    ('(x1^2 - 2*x1*x2)^2 + x2^4', 2),
    ('(x1^3 - x2)^2', 3),
    ('(x1^2*x2 - x1 + 1)^2 + (x2^3)^2', 3),
    ('(x1*x2^2 + x1)^2 + (x1^2 - x2^2)^2', 3),
    ('(x1^3 + x1*x2^2 - x2)^2 + (x2^2 - 1)^2', 3),
]


@pytest.mark.solver
@pytest.mark.parametrize('squares, half_degree', KNOWN_SOS)
def test_known_sos_round_trip(squares, half_degree):
    """Sums of squares pushed into the interior by ``0.1 (1 + |x|^2)^d``."""
    p = parse_polynomial(squares, SPACE) + 0.1 * parse_polynomial('1 + x1^2 + x2^2', SPACE) ** half_degree
    matrix = PolynomialMatrix(SPACE, 1, 1, [p])
    solution = check_sos(matrix)
    assert solution.margin > 0
    assert verify_sos(solution.certificate).passed

    points = np.random.default_rng(11).uniform(-3, 3, size=(100, 2))
    norms = np.linalg.norm(points, axis=1)
    assert np.all(p.evaluate_many(points) >= -1e-5 * (1 + norms ** p.degree))


@pytest.mark.solver
def test_motzkin_is_not_sos():
    motzkin = scalar('x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2 + 1')
    points = np.random.default_rng(12).uniform(-2, 2, size=(500, 2))
    assert motzkin.entry(0, 0).evaluate_many(points).min() >= -1e-12
    with pytest.raises(InfeasibleError):
        check_sos(motzkin)
    assert not certify_fixed('motzkin', motzkin).passed
