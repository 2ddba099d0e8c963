"""Matrices of polynomials.

Entries are stored row-major. Symmetric matrices built through
:meth:`PolynomialMatrix.symmetric` share one entry object for ``(i, j)`` and
``(j, i)``, which keeps decision coefficients identical across the diagonal.
"""
import numbers
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from polystab.models.types import VariableGroup
from polystab.poly.affine import AffineForm
from polystab.poly.polynomial import Polynomial, Scalar
from polystab.poly.space import VariableSpace
from polystab.utils.exceptions import (
    DimensionMismatchError,
    NotSymmetricError,
    SymbolicUnavailableError,
)

MAX_SYMBOLIC_SIZE = 5

Entry = Union[Polynomial, Scalar]


class PolynomialMatrix:
    __slots__ = ('space', 'rows', 'cols', '_entries')
    __array_ufunc__ = None

    def __init__(self, space: VariableSpace, rows: int, cols: int, entries: Sequence[Entry]):
        if rows <= 0 or cols <= 0:
            raise DimensionMismatchError(f'matrix dimensions must be positive, got {rows}x{cols}')
        if len(entries) != rows * cols:
            raise DimensionMismatchError(f'{rows}x{cols} matrix needs {rows * cols} entries, got {len(entries)}')
        self.space = space
        self.rows = rows
        self.cols = cols
        self._entries: Tuple[Polynomial, ...] = tuple(self._as_poly(e) for e in entries)

    def _as_poly(self, entry: Entry) -> Polynomial:
        if isinstance(entry, Polynomial):
            self.space.require_same(entry.space)
            return entry
        return Polynomial.constant(self.space, entry)

    @classmethod
    def from_rows(cls, space: VariableSpace, rows: Sequence[Sequence[Entry]]) -> 'PolynomialMatrix':
        rows = [list(row) for row in rows]
        widths = {len(row) for row in rows}
        if len(widths) != 1:
            raise DimensionMismatchError(f'ragged rows: widths {sorted(widths)}')
        return cls(space, len(rows), widths.pop(), [e for row in rows for e in row])

    @classmethod
    def column(cls, space: VariableSpace, entries: Sequence[Entry]) -> 'PolynomialMatrix':
        return cls(space, len(entries), 1, list(entries))

    @classmethod
    def from_numeric(cls, space: VariableSpace, array) -> 'PolynomialMatrix':
        array = np.atleast_2d(np.asarray(array, dtype=float))
        return cls(space, array.shape[0], array.shape[1], [float(v) for v in array.ravel()])

    @classmethod
    def zeros(cls, space: VariableSpace, rows: int, cols: int) -> 'PolynomialMatrix':
        zero = Polynomial.zero(space)
        return cls(space, rows, cols, [zero] * (rows * cols))

    @classmethod
    def identity(cls, space: VariableSpace, size: int, scale: Entry = 1.0) -> 'PolynomialMatrix':
        zero = Polynomial.zero(space)
        diag = scale if isinstance(scale, Polynomial) else Polynomial.constant(space, scale)
        return cls(space, size, size, [diag if i == j else zero for i in range(size) for j in range(size)])

    @classmethod
    def symmetric(cls, space: VariableSpace, size: int,
                  upper: Callable[[int, int], Entry]) -> 'PolynomialMatrix':
        """Build from ``upper(i, j)`` for ``i <= j``; lower entries share the same objects."""
        cache: Dict[Tuple[int, int], Entry] = {}
        for i in range(size):
            for j in range(i, size):
                cache[i, j] = upper(i, j)
        return cls(space, size, size, [cache[min(i, j), max(i, j)] for i in range(size) for j in range(size)])

    @classmethod
    def block(cls, blocks: Sequence[Sequence['PolynomialMatrix']]) -> 'PolynomialMatrix':
        """Assemble from a grid of blocks with conforming row heights and column widths."""
        space = blocks[0][0].space
        heights = [row[0].rows for row in blocks]
        widths = [b.cols for b in blocks[0]]
        for bi, row in enumerate(blocks):
            if len(row) != len(widths):
                raise DimensionMismatchError(f'block row {bi} has {len(row)} blocks, expected {len(widths)}')
            for bj, blk in enumerate(row):
                if blk.rows != heights[bi] or blk.cols != widths[bj]:
                    raise DimensionMismatchError(
                        f'block ({bi},{bj}) is {blk.rows}x{blk.cols}, expected {heights[bi]}x{widths[bj]}')
        entries = []
        for bi, row in enumerate(blocks):
            for i in range(heights[bi]):
                for blk in row:
                    entries.extend(blk._entries[i * blk.cols:(i + 1) * blk.cols])
        return cls(space, sum(heights), sum(widths), entries)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def entry(self, i: int, j: int) -> Polynomial:
        return self._entries[i * self.cols + j]

    def __getitem__(self, index: Tuple[int, int]) -> Polynomial:
        i, j = index
        return self.entry(i, j)

    @property
    def entries(self) -> Tuple[Polynomial, ...]:
        return self._entries

    def row(self, i: int) -> 'PolynomialMatrix':
        return PolynomialMatrix(self.space, 1, self.cols, self._entries[i * self.cols:(i + 1) * self.cols])

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> 'PolynomialMatrix':
        return PolynomialMatrix(self.space, len(rows), len(cols), [self.entry(i, j) for i in rows for j in cols])

    def map(self, func: Callable[[Polynomial], Polynomial], space: Optional[VariableSpace] = None) -> 'PolynomialMatrix':
        """Apply ``func`` entry-wise; shared entries stay shared."""
        done: Dict[int, Polynomial] = {}
        out = []
        for e in self._entries:
            key = id(e)
            if key not in done:
                done[key] = func(e)
            out.append(done[key])
        return PolynomialMatrix(space or self.space, self.rows, self.cols, out)

    @property
    def T(self) -> 'PolynomialMatrix':
        return self.transpose()

    def transpose(self) -> 'PolynomialMatrix':
        return PolynomialMatrix(self.space, self.cols, self.rows,
                                [self.entry(i, j) for j in range(self.cols) for i in range(self.rows)])

    def _check_same_shape(self, other: 'PolynomialMatrix'):
        self.space.require_same(other.space)
        if self.shape != other.shape:
            raise DimensionMismatchError(f'shape {self.shape} does not match {other.shape}')

    def __add__(self, other: 'PolynomialMatrix') -> 'PolynomialMatrix':
        if not isinstance(other, PolynomialMatrix):
            return NotImplemented
        self._check_same_shape(other)
        return PolynomialMatrix(self.space, self.rows, self.cols,
                                [a + b for a, b in zip(self._entries, other._entries)])

    def __sub__(self, other: 'PolynomialMatrix') -> 'PolynomialMatrix':
        if not isinstance(other, PolynomialMatrix):
            return NotImplemented
        self._check_same_shape(other)
        return PolynomialMatrix(self.space, self.rows, self.cols,
                                [a - b for a, b in zip(self._entries, other._entries)])

    def __neg__(self) -> 'PolynomialMatrix':
        return self.map(lambda e: -e)

    def scale(self, factor: Entry) -> 'PolynomialMatrix':
        if isinstance(factor, Polynomial):
            return self.map(lambda e: e * factor)
        return self.map(lambda e: e.scale(factor))

    def __mul__(self, other) -> 'PolynomialMatrix':
        if isinstance(other, (numbers.Real, AffineForm, Polynomial)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other: 'PolynomialMatrix') -> 'PolynomialMatrix':
        if not isinstance(other, PolynomialMatrix):
            return NotImplemented
        self.space.require_same(other.space)
        if self.cols != other.rows:
            raise DimensionMismatchError(f'cannot multiply {self.shape} by {other.shape}')
        zero = Polynomial.zero(self.space)
        entries = []
        for i in range(self.rows):
            for j in range(other.cols):
                total = zero
                for k in range(self.cols):
                    a, b = self.entry(i, k), other.entry(k, j)
                    if not a.is_zero and not b.is_zero:
                        total = total + a * b
                entries.append(total)
        return PolynomialMatrix(self.space, self.rows, other.cols, entries)

    def kron(self, other: 'PolynomialMatrix') -> 'PolynomialMatrix':
        """Kronecker product; block ``(i, j)`` of the result is ``self[i, j] * other``."""
        self.space.require_same(other.space)
        entries = []
        for i in range(self.rows):
            for k in range(other.rows):
                for j in range(self.cols):
                    for l in range(other.cols):
                        entries.append(self.entry(i, j) * other.entry(k, l))
        return PolynomialMatrix(self.space, self.rows * other.rows, self.cols * other.cols, entries)

    def diff(self, var: Union[int, str]) -> 'PolynomialMatrix':
        return self.map(lambda e: e.diff(var))

    def jacobian(self, group: VariableGroup = VariableGroup.ALL) -> 'PolynomialMatrix':
        """Partials of a column restricted to a variable group, columns in group order."""
        if self.cols != 1:
            raise DimensionMismatchError(f'jacobian needs a column, got {self.shape}')
        indices = self.space.group_indices(group)
        if not indices:
            raise DimensionMismatchError(f'variable group {group} is empty')
        return PolynomialMatrix(self.space, self.rows, len(indices),
                                [self._entries[i].diff(k) for i in range(self.rows) for k in indices])

    def trace(self) -> Polynomial:
        total = Polynomial.zero(self.space)
        for i in range(min(self.rows, self.cols)):
            total = total + self.entry(i, i)
        return total

    def as_scalar(self) -> Polynomial:
        if self.shape != (1, 1):
            raise DimensionMismatchError(f'expected a 1x1 matrix, got {self.shape}')
        return self._entries[0]

    def is_symmetric(self) -> bool:
        if self.rows != self.cols:
            return False
        for i in range(self.rows):
            for j in range(i + 1, self.cols):
                a, b = self.entry(i, j), self.entry(j, i)
                if a is not b and a != b:
                    return False
        return True

    def require_symmetric(self, label: str = ''):
        if not self.is_symmetric():
            raise NotSymmetricError(f'matrix {label or self.shape} is not symmetric')

    @property
    def degree(self) -> int:
        return max(e.degree for e in self._entries)

    @property
    def is_numeric(self) -> bool:
        return all(e.is_numeric for e in self._entries)

    def evaluate(self, point) -> np.ndarray:
        return np.array([e.evaluate(point) for e in self._entries]).reshape(self.rows, self.cols)

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at each row of ``points``; returns shape ``(N, rows, cols)``."""
        points = np.asarray(points, dtype=float)
        done: Dict[int, np.ndarray] = {}
        values = []
        for e in self._entries:
            key = id(e)
            if key not in done:
                done[key] = e.evaluate_many(points)
            values.append(done[key])
        return np.stack(values, axis=-1).reshape(points.shape[0], self.rows, self.cols)

    def substitute(self, values: np.ndarray) -> 'PolynomialMatrix':
        return self.map(lambda e: e.substitute(values))

    def lift(self, space: VariableSpace) -> 'PolynomialMatrix':
        return self.map(lambda e: e.lift(space), space)

    def project(self, space: VariableSpace) -> 'PolynomialMatrix':
        return self.map(lambda e: e.project(space), space)

    def pruned(self, tol: float = 1e-14) -> 'PolynomialMatrix':
        return self.map(lambda e: e.pruned(tol))

    def coefficient_gap(self, other: 'PolynomialMatrix') -> float:
        self._check_same_shape(other)
        return max(a.coefficient_gap(b) for a, b in zip(self._entries, other._entries))

    def determinant(self) -> Polynomial:
        return self._cofactors()[1]

    def adjugate(self) -> 'PolynomialMatrix':
        return self._cofactors()[0]

    def _cofactors(self) -> Tuple['PolynomialMatrix', Polynomial]:
        """Adjugate and determinant by Laplace expansion with memoized minors."""
        if self.rows != self.cols:
            raise DimensionMismatchError(f'adjugate needs a square matrix, got {self.shape}')
        size = self.rows
        if size > MAX_SYMBOLIC_SIZE:
            raise SymbolicUnavailableError(
                f'symbolic adjugate is limited to size {MAX_SYMBOLIC_SIZE}, got {size}')

        @lru_cache(maxsize=None)
        def minor(rows: Tuple[int, ...], cols: Tuple[int, ...]) -> Polynomial:
            if not rows:
                return Polynomial.constant(self.space, 1.0)
            r = rows[0]
            total = Polynomial.zero(self.space)
            for pos, c in enumerate(cols):
                e = self.entry(r, c)
                if e.is_zero:
                    continue
                term = e * minor(rows[1:], cols[:pos] + cols[pos + 1:])
                total = total - term if pos % 2 else total + term
            return total

        everything = tuple(range(size))
        det = minor(everything, everything)
        adj: List[Polynomial] = []
        for i in range(size):
            for j in range(size):
                rows = tuple(k for k in everything if k != j)
                cols = tuple(k for k in everything if k != i)
                cof = minor(rows, cols)
                adj.append(-cof if (i + j) % 2 else cof)
        return PolynomialMatrix(self.space, size, size, adj), det

    def to_text(self) -> List[List[str]]:
        return [[self.entry(i, j).to_text() for j in range(self.cols)] for i in range(self.rows)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolynomialMatrix):
            return NotImplemented
        return self.shape == other.shape and all(a == b for a, b in zip(self._entries, other._entries))

    __hash__ = None

    def __repr__(self) -> str:
        return f'PolynomialMatrix({self.rows}x{self.cols})'
