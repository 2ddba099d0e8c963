"""Sparse multivariate polynomials over a :class:`VariableSpace`.

Terms map exponent tuples to coefficients. Coefficients are floats, or
:class:`AffineForm` while a polynomial still carries SOS decision
variables. Exact zeros are never stored; values are immutable after
construction.
"""
import math
import numbers
import operator
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Set, Tuple, Union

import numpy as np

from polystab.poly.affine import (
    AffineForm,
    Coef,
    coef_add,
    coef_mul,
    coef_neg,
    is_numeric,
    is_zero,
    magnitude,
    substitute,
)
from polystab.poly.space import VariableSpace
from polystab.utils.exceptions import (
    DimensionMismatchError,
    SpaceMismatchError,
    UnresolvedDecisionError,
)

Monomial = Tuple[int, ...]
Scalar = Union[int, float, AffineForm]


def grlex_key(monomial: Monomial) -> Tuple[int, Tuple[int, ...]]:
    """Graded lexicographic order: total degree first, then x1 before x2."""
    return sum(monomial), tuple(-e for e in monomial)


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(map(operator.add, a, b))


class Polynomial:
    __slots__ = ('space', '_terms')
    __array_ufunc__ = None

    def __init__(self, space: VariableSpace, terms: Optional[Mapping[Monomial, Scalar]] = None):
        self.space = space
        clean: Dict[Monomial, Coef] = {}
        for monomial, coef in (terms or {}).items():
            monomial = tuple(int(e) for e in monomial)
            if len(monomial) != space.dim:
                raise DimensionMismatchError(
                    f'exponent {monomial} has length {len(monomial)}, space has {space.dim} variables')
            if any(e < 0 for e in monomial):
                raise ValueError(f'negative exponent in {monomial}')
            if not isinstance(coef, AffineForm):
                coef = float(coef)
            if not is_zero(coef):
                clean[monomial] = coef
        self._terms = clean

    @classmethod
    def _raw(cls, space: VariableSpace, terms: Dict[Monomial, Coef]) -> 'Polynomial':
        poly = cls.__new__(cls)
        poly.space = space
        poly._terms = terms
        return poly

    @classmethod
    def zero(cls, space: VariableSpace) -> 'Polynomial':
        return cls._raw(space, {})

    @classmethod
    def constant(cls, space: VariableSpace, value: Scalar) -> 'Polynomial':
        return cls(space, {(0,) * space.dim: value})

    @classmethod
    def variable(cls, space: VariableSpace, var: Union[int, str]) -> 'Polynomial':
        k = space.index(var) if isinstance(var, str) else var
        exps = [0] * space.dim
        exps[k] = 1
        return cls._raw(space, {tuple(exps): 1.0})

    @classmethod
    def monomial(cls, space: VariableSpace, exponents: Monomial, coef: Scalar = 1.0) -> 'Polynomial':
        return cls(space, {tuple(exponents): coef})

    @property
    def terms(self) -> Mapping[Monomial, Coef]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[Monomial, Coef]]:
        """Terms in graded lexicographic order."""
        for monomial in sorted(self._terms, key=grlex_key):
            yield monomial, self._terms[monomial]

    def coefficient(self, monomial: Monomial) -> Coef:
        return self._terms.get(tuple(monomial), 0.0)

    @property
    def support(self) -> Set[Monomial]:
        return set(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def degree(self) -> int:
        """Total degree; the zero polynomial has degree -1."""
        return max((sum(m) for m in self._terms), default=-1)

    def degree_in(self, indices: Iterable[int]) -> int:
        indices = tuple(indices)
        return max((sum(m[k] for k in indices) for m in self._terms), default=-1)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return all(not any(m) for m in self._terms)

    @property
    def is_numeric(self) -> bool:
        return all(is_numeric(c) for c in self._terms.values())

    @property
    def decision_indices(self) -> Set[int]:
        found: Set[int] = set()
        for coef in self._terms.values():
            if isinstance(coef, AffineForm):
                found.update(coef.coefs)
        return found

    def constant_term(self) -> Coef:
        return self._terms.get((0,) * self.space.dim, 0.0)

    def _coerce(self, other) -> 'Polynomial':
        if isinstance(other, Polynomial):
            self.space.require_same(other.space)
            return other
        if isinstance(other, (numbers.Real, AffineForm)):
            return Polynomial.constant(self.space, other)
        return NotImplemented

    def __add__(self, other) -> 'Polynomial':
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for monomial, coef in other._terms.items():
            total = coef_add(terms[monomial], coef) if monomial in terms else coef
            if is_zero(total):
                terms.pop(monomial, None)
            else:
                terms[monomial] = total
        return Polynomial._raw(self.space, terms)

    __radd__ = __add__

    def __neg__(self) -> 'Polynomial':
        return Polynomial._raw(self.space, {m: coef_neg(c) for m, c in self._terms.items()})

    def __sub__(self, other) -> 'Polynomial':
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> 'Polynomial':
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other) -> 'Polynomial':
        if isinstance(other, (numbers.Real, AffineForm)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms: Dict[Monomial, Coef] = {}
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                monomial = mono_mul(ma, mb)
                product = coef_mul(ca, cb)
                terms[monomial] = coef_add(terms[monomial], product) if monomial in terms else product
        return Polynomial._raw(self.space, {m: c for m, c in terms.items() if not is_zero(c)})

    __rmul__ = __mul__

    def scale(self, factor: Scalar) -> 'Polynomial':
        if not isinstance(factor, AffineForm):
            factor = float(factor)
        terms = {m: coef_mul(c, factor) for m, c in self._terms.items()}
        return Polynomial._raw(self.space, {m: c for m, c in terms.items() if not is_zero(c)})

    def __pow__(self, exponent: int) -> 'Polynomial':
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError(f'polynomial powers need a non-negative integer, got {exponent!r}')
        result = Polynomial.constant(self.space, 1.0)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.space == other.space and self._terms == other._terms

    __hash__ = None

    def diff(self, var: Union[int, str]) -> 'Polynomial':
        k = self.space.index(var) if isinstance(var, str) else var
        if not 0 <= k < self.space.dim:
            raise DimensionMismatchError(f'variable index {k} outside space of dimension {self.space.dim}')
        terms: Dict[Monomial, Coef] = {}
        for monomial, coef in self._terms.items():
            e = monomial[k]
            if e == 0:
                continue
            lowered = monomial[:k] + (e - 1,) + monomial[k + 1:]
            terms[lowered] = coef_mul(coef, float(e))
        return Polynomial._raw(self.space, terms)

    def _require_numeric(self):
        if not self.is_numeric:
            raise UnresolvedDecisionError('polynomial still depends on decision variables')

    def evaluate(self, point: Iterable[float]) -> float:
        point = [float(v) for v in point]
        if len(point) != self.space.dim:
            raise DimensionMismatchError(f'point has length {len(point)}, space has {self.space.dim} variables')
        self._require_numeric()
        total = 0.0
        for monomial, coef in self.items():
            total += coef * math.prod(x ** e for x, e in zip(point, monomial) if e)
        return total

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at each row of an ``(N, dim)`` array."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.space.dim:
            raise DimensionMismatchError(f'points must have shape (N, {self.space.dim}), got {points.shape}')
        self._require_numeric()
        total = np.zeros(points.shape[0])
        for monomial, coef in self.items():
            term = np.full(points.shape[0], coef)
            for k, e in enumerate(monomial):
                if e:
                    term = term * points[:, k] ** e
            total += term
        return total

    def substitute(self, values: np.ndarray) -> 'Polynomial':
        """Replace decision variables by ``values`` (indexed by global decision index)."""
        terms = {m: substitute(c, values) for m, c in self._terms.items()}
        return Polynomial._raw(self.space, {m: c for m, c in terms.items() if c != 0.0})

    def lift(self, space: VariableSpace) -> 'Polynomial':
        """Embed into a space that extends this one with trailing variables."""
        if space == self.space:
            return self
        if not self.space.is_prefix_of(space):
            raise SpaceMismatchError(f'{space.names} does not extend {self.space.names}')
        pad = (0,) * (space.dim - self.space.dim)
        return Polynomial._raw(space, {m + pad: c for m, c in self._terms.items()})

    def project(self, space: VariableSpace) -> 'Polynomial':
        """Inverse of :meth:`lift`; the dropped variables must not appear."""
        if space == self.space:
            return self
        if not space.is_prefix_of(self.space):
            raise SpaceMismatchError(f'{self.space.names} does not extend {space.names}')
        keep = space.dim
        terms = {}
        for monomial, coef in self._terms.items():
            if any(monomial[keep:]):
                raise SpaceMismatchError(
                    f'cannot drop variables {self.space.names[keep:]} that appear in the polynomial')
            terms[monomial[:keep]] = coef
        return Polynomial._raw(space, terms)

    def pruned(self, tol: float = 1e-14) -> 'Polynomial':
        """Drop numeric coefficients with magnitude at most ``tol``."""
        return Polynomial._raw(self.space, {
            m: c for m, c in self._terms.items() if isinstance(c, AffineForm) or abs(c) > tol
        })

    def max_coefficient(self) -> float:
        return max((magnitude(c) for c in self._terms.values()), default=0.0)

    def coefficient_gap(self, other: 'Polynomial') -> float:
        """Max absolute coefficient difference after term alignment."""
        return (self - other).max_coefficient()

    def monomials(self) -> List[Monomial]:
        return sorted(self._terms, key=grlex_key)

    def to_text(self) -> str:
        from polystab.poly.parser import format_polynomial
        return format_polynomial(self)

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f'Polynomial({self.to_text()!r})'
