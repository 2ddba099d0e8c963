"""Plant, structure and tuning types shared by model- and data-based synthesis."""
import itertools
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from polystab.poly.matrix import PolynomialMatrix
from polystab.poly.polynomial import Polynomial
from polystab.poly.space import VariableSpace
from polystab.utils.exceptions import DimensionMismatchError


@dataclass(frozen=True, eq=False)
class PlantShape:
    """Known part of ``x' = [A1; A2] F(x) + [0; B2] G(x) u``: the maps ``F`` and ``G``."""
    space: VariableSpace
    F: PolynomialMatrix
    G: PolynomialMatrix

    def __post_init__(self):
        if self.F.cols != 1:
            raise DimensionMismatchError(f'F must be a column, got {self.F.shape}')
        self.space.require_same(self.F.space)
        self.space.require_same(self.G.space)

    @property
    def n1(self) -> int:
        return self.space.n1

    @property
    def n2(self) -> int:
        return self.space.n2

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def f(self) -> int:
        return self.F.rows

    @property
    def g(self) -> int:
        return self.G.rows

    @property
    def m(self) -> int:
        return self.G.cols

    @property
    def ell(self) -> int:
        """Number of unknown parameters ``n1*f + n2*(f + g)``."""
        return self.n1 * self.f + self.n2 * (self.f + self.g)


def _as_matrix(value, rows: int, cols: int, name: str) -> np.ndarray:
    array = np.asarray(value, dtype=float)
    if array.size == 0 and rows * cols == 0:
        return np.zeros((rows, cols))
    array = array.reshape(array.shape if array.ndim == 2 else (rows, -1))
    if array.shape != (rows, cols):
        raise DimensionMismatchError(f'{name} must be {rows}x{cols}, got {array.shape[0]}x{array.shape[1]}')
    return array


def stack_parameters(A1: np.ndarray, A2: np.ndarray, B2: np.ndarray) -> np.ndarray:
    """``v = [vec(A1^T); vec(A2^T); vec(B2^T)]``, i.e. the rows of each matrix in turn."""
    return np.concatenate([np.asarray(M, dtype=float).ravel() for M in (A1, A2, B2)])


@dataclass(frozen=True, eq=False)
class PlantModel:
    shape: PlantShape
    A1: np.ndarray
    A2: np.ndarray
    B2: np.ndarray

    def __post_init__(self):
        s = self.shape
        object.__setattr__(self, 'A1', _as_matrix(self.A1, s.n1, s.f, 'A1'))
        object.__setattr__(self, 'A2', _as_matrix(self.A2, s.n2, s.f, 'A2'))
        object.__setattr__(self, 'B2', _as_matrix(self.B2, s.n2, s.g, 'B2'))

    @classmethod
    def from_parameters(cls, shape: PlantShape, v: np.ndarray) -> 'PlantModel':
        v = np.asarray(v, dtype=float).ravel()
        if v.size != shape.ell:
            raise DimensionMismatchError(f'parameter vector has {v.size} entries, expected {shape.ell}')
        a1 = shape.n1 * shape.f
        a2 = a1 + shape.n2 * shape.f
        return cls(shape, v[:a1].reshape(shape.n1, shape.f), v[a1:a2].reshape(shape.n2, shape.f),
                   v[a2:].reshape(shape.n2, shape.g))

    @property
    def space(self) -> VariableSpace:
        return self.shape.space

    @property
    def A(self) -> np.ndarray:
        return np.vstack([self.A1, self.A2])

    @property
    def B(self) -> np.ndarray:
        return np.vstack([np.zeros((self.shape.n1, self.shape.g)), self.B2])

    @property
    def parameters(self) -> np.ndarray:
        return stack_parameters(self.A1, self.A2, self.B2)

    def with_matrices(self, **changes) -> 'PlantModel':
        return replace(self, **changes)

    def drift(self, points: np.ndarray) -> np.ndarray:
        """``A F(x)`` at each row of ``points``; shape ``(N, n)``."""
        F = self.shape.F.evaluate_many(points)[:, :, 0]
        return F @ self.A.T

    def input_gain(self, points: np.ndarray) -> np.ndarray:
        """``B G(x)`` at each row of ``points``; shape ``(N, n, m)``."""
        G = self.shape.G.evaluate_many(points)
        return np.einsum('ij,njk->nik', self.B, G)

    def field(self, points: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Vector field at ``points`` (N, n) under inputs ``u`` (N, m)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        u = np.asarray(u, dtype=float).reshape(points.shape[0], self.shape.m)
        return self.drift(points) + np.einsum('nik,nk->ni', self.input_gain(points), u)


@dataclass(frozen=True, eq=False)
class StructureChoice:
    """Lyapunov structure: ``Z(x)`` (p x 1) and ``H(x)`` (f x p) with ``F = H Z``."""
    Z: PolynomialMatrix
    H: PolynomialMatrix

    def __post_init__(self):
        if self.Z.cols != 1:
            raise DimensionMismatchError(f'Z must be a column, got {self.Z.shape}')
        if self.H.cols != self.Z.rows:
            raise DimensionMismatchError(f'H has {self.H.cols} columns, Z has {self.Z.rows} rows')

    @property
    def p(self) -> int:
        return self.Z.rows

    @property
    def space(self) -> VariableSpace:
        return self.Z.space


@dataclass(frozen=True, eq=False)
class EpsilonConfig:
    eps1: float
    eps2: Polynomial
    eps3: Polynomial
    c: Optional[float] = None
    r: Optional[float] = None

    def __post_init__(self):
        if not self.eps1 > 0:
            raise ValueError(f'eps1 must be positive, got {self.eps1}')
        for name in ('c', 'r'):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f'{name} must be positive, got {value}')

    def with_decay(self, c: float, r: float) -> 'EpsilonConfig':
        return replace(self, c=c, r=r)


@dataclass(frozen=True)
class DegreeChoice:
    P: int
    L: int
    P_variables: Optional[Tuple[str, ...]] = None
    P_even: bool = False

    def with_P(self, degree: int) -> 'DegreeChoice':
        return replace(self, P=degree)


@dataclass(frozen=True)
class VerificationGrid:
    lower: float = -3.0
    upper: float = 3.0
    points: int = 21
    max_points: int = field(default=200_000, compare=False)

    def points_for(self, n: int) -> np.ndarray:
        """Uniform tensor grid in lexicographic order; shape ``(points**n, n)``."""
        if self.points ** n > self.max_points:
            raise ValueError(f'grid of {self.points}^{n} points exceeds {self.max_points}; lower grid.points')
        axis = np.linspace(self.lower, self.upper, self.points)
        return np.array(list(itertools.product(axis, repeat=n)), dtype=float)
