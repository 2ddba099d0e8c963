import numpy as np
import pytest

from polystab.models.types import VariableGroup
from polystab.poly import format_polynomial, parse_column, parse_matrix, parse_polynomial
from polystab.poly.matrix import PolynomialMatrix
from polystab.poly.polynomial import Polynomial
from polystab.poly.space import VariableSpace
from polystab.utils.exceptions import (
    DimensionMismatchError,
    PolynomialSyntaxError,
    SpaceMismatchError,
    SymbolicUnavailableError,
    UnknownVariableError,
)

SPACE = VariableSpace(x1=('x1',), x2=('x2',))


def poly(text: str, space: VariableSpace = SPACE) -> Polynomial:
    return parse_polynomial(text, space)


def test_space_layout():
    """Groups are laid out x1 | x2 | y | z."""
    space = SPACE.with_y(2).with_z(3)
    assert space.names == ('x1', 'x2', 'y_1', 'y_2', 'z_1', 'z_2', 'z_3')
    assert space.group_indices(VariableGroup.X1) == (0,)
    assert space.group_indices(VariableGroup.Y) == (2, 3)
    assert space.group_indices(VariableGroup.Z) == (4, 5, 6)
    assert space.group_indices(VariableGroup.ALL) == (0, 1)
    assert space.state == SPACE
    assert VariableSpace.of(['a', 'b', 'c'], n1=2).x1 == ('a', 'b')


def test_space_needs_x2():
    with pytest.raises(ValueError):
        VariableSpace(x1=('x1',), x2=())


def test_parse_and_evaluate():
    p = poly('2*x1^2 - (x1 + x2)*x2 + 3')
    assert p.evaluate([1.0, 2.0]) == pytest.approx(2 - 6 + 3)
    assert p.coefficient((2, 0)) == 2.0
    assert p.coefficient((1, 1)) == -1.0
    assert p.degree == 2


def test_parse_rejects_implicit_multiplication():
    with pytest.raises(PolynomialSyntaxError) as info:
        poly('2x1')
    assert info.value.position == 1


def test_parse_reports_unknown_variable_position():
    with pytest.raises(UnknownVariableError) as info:
        poly('x1 + x3')
    assert info.value.name == 'x3'
    assert info.value.position == 5


@pytest.mark.parametrize('text', ['x1^', 'x1^-1', '(x1 + x2', 'x1 +', ''])
def test_parse_syntax_errors(text):
    with pytest.raises(PolynomialSyntaxError):
        poly(text)


def test_format_reparse_exact():
    p = poly('0.1*x1^3 - 0.3333333333333333*x2 + 7')
    text = format_polynomial(p)
    assert poly(text) == p


def test_arithmetic_identities():
    p = poly('x1^2 + x2')
    q = poly('x1 - 2*x2^3')
    assert (p * q) - (q * p) == Polynomial.zero(SPACE)
    assert (p + q) ** 2 == p ** 2 + p * q.scale(2.0) + q ** 2
    assert (p - p).is_zero


def test_diff():
    p = poly('x1^3*x2 + 4*x2^2')
    assert p.diff('x1') == poly('3*x1^2*x2')
    assert p.diff(1) == poly('x1^3 + 8*x2')


def test_lift_and_project():
    extended = SPACE.with_y(1)
    p = poly('x1*x2 + 1')
    lifted = p.lift(extended)
    assert lifted.space == extended
    assert lifted.project(SPACE) == p
    with pytest.raises(SpaceMismatchError):
        (lifted + Polynomial.variable(extended, 'y_1')).project(SPACE)


def test_mixing_spaces_raises():
    other = VariableSpace(x1=(), x2=('x2', 'x1'))
    with pytest.raises(SpaceMismatchError):
        poly('x1') + Polynomial.variable(other, 'x1')


def test_evaluate_many_matches_evaluate():
    rng = np.random.default_rng(3)
    p = poly('x1^4 - 3*x1*x2^2 + 0.5')
    points = rng.uniform(-2, 2, size=(50, 2))
    np.testing.assert_allclose(p.evaluate_many(points), [p.evaluate(x) for x in points], rtol=1e-12)
    with pytest.raises(DimensionMismatchError):
        p.evaluate_many(points[:, :1])


def test_matrix_products_and_transpose():
    A = parse_matrix([['x1', '1'], ['0', 'x2']], SPACE)
    B = parse_matrix([['1', 'x2'], ['x1', '0']], SPACE)
    C = A @ B
    assert C.entry(0, 0) == poly('2*x1')
    assert C.entry(0, 1) == poly('x1*x2')
    assert (A @ B).T == B.T @ A.T
    with pytest.raises(DimensionMismatchError):
        A @ parse_column(['1'], SPACE)


def test_kron_layout():
    a = parse_column(['x1', 'x2'], SPACE)
    b = parse_column(['1', 'x1'], SPACE)
    k = a.kron(b)
    assert k.shape == (4, 1)
    assert [e.to_text() for e in k.entries] == ['x1', 'x1^2', 'x2', 'x1*x2']


def test_jacobian_by_group():
    Z = parse_column(['x1^2', 'x1*x2'], SPACE)
    J = Z.jacobian(VariableGroup.X2)
    assert J.shape == (2, 1)
    assert J.entry(1, 0) == poly('x1')


def test_adjugate_and_determinant():
    P = parse_matrix([['1', 'x1 - 0.5'], ['x1 - 0.5', '2*(x1 - 0.5)^2 + 3']], SPACE)
    assert P.determinant() == poly('3.25 - x1 + x1^2')
    product = P @ P.adjugate()
    det = P.determinant()
    assert product == PolynomialMatrix.identity(SPACE, 2, det)


def test_adjugate_numeric_agreement():
    rng = np.random.default_rng(7)
    M = rng.normal(size=(4, 4))
    P = PolynomialMatrix.from_numeric(SPACE, M + M.T)
    point = np.zeros((1, 2))
    np.testing.assert_allclose(P.determinant().evaluate([0, 0]), np.linalg.det(M + M.T), rtol=1e-10)
    np.testing.assert_allclose(P.adjugate().evaluate_many(point)[0] @ (M + M.T),
                               np.linalg.det(M + M.T) * np.eye(4), atol=1e-9)


def test_symbolic_size_limit():
    P = PolynomialMatrix.identity(SPACE, 6)
    with pytest.raises(SymbolicUnavailableError):
        P.adjugate()


def test_to_text_reparses():
    P = parse_matrix([['x1^2 + 0.25', '-x2'], ['-x2', '3']], SPACE)
    assert parse_matrix(P.to_text(), SPACE) == P


def test_evaluation_sums_in_graded_order():
    p = Polynomial(SPACE, {(0, 2): -1e16, (1, 0): 1e16, (0, 0): 3.0, (2, 1): 0.5})
    assert [m for m, _ in p.items()] == [(0, 0), (1, 0), (0, 2), (2, 1)]
    point = [1.0, 1.0]
    expected = 0.0
    for _, coef in p.items():
        expected += coef
    assert p.evaluate(point) == expected
    assert p.evaluate_many(np.array([point]))[0] == expected
