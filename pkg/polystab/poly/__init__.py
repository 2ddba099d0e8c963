from polystab.poly.affine import AffineForm
from polystab.poly.matrix import PolynomialMatrix
from polystab.poly.parser import format_polynomial, parse_polynomial
from polystab.poly.polynomial import Monomial, Polynomial, grlex_key
from polystab.poly.space import VariableSpace


def parse_matrix(rows, space: VariableSpace) -> PolynomialMatrix:
    """Parse a nested list of expression strings into a matrix."""
    return PolynomialMatrix.from_rows(space, [[parse_polynomial(e, space) for e in row] for row in rows])


def parse_column(entries, space: VariableSpace) -> PolynomialMatrix:
    return PolynomialMatrix.column(space, [parse_polynomial(e, space) for e in entries])


__all__ = (
    'AffineForm',
    'Monomial',
    'Polynomial',
    'PolynomialMatrix',
    'VariableSpace',
    'format_polynomial',
    'grlex_key',
    'parse_column',
    'parse_matrix',
    'parse_polynomial',
)
