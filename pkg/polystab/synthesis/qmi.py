"""The set of systems compatible with noisy data, as a quadratic inequality in ``v``.

With ``xi = vec(Xdot^T)`` (the rows of ``Xdot`` one after the other) and
the data matrix ``D``, a parameter vector ``v`` explains the data within the
noise bound iff ``Phi11 - ||xi - D^T v||^2 >= 0``, i.e. ``[1; v]^T N [1; v] >= 0``
with ``N11 = Phi11 - xi^T xi``, ``N21 = D xi`` and ``N22 = -D D^T``.
"""
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Tuple, Union

import numpy as np

from polystab.models.types import ParameterMatrix
from polystab.synthesis.plant import PlantShape, stack_parameters
from polystab.utils.exceptions import DataRankError, DimensionMismatchError, QmiError

logger = logging.getLogger(__name__)

RANK_TOL = 1e-8
EIGEN_FLOOR = 1e-12
SCHUR_TOL = 1e-9
SLEMMA_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Dataset:
    """Samples ``x(t_i)``, ``xdot(t_i)``, ``u(t_i)``; one column per sample."""
    t: np.ndarray
    X: np.ndarray
    Xdot: np.ndarray
    U: np.ndarray

    def __post_init__(self):
        for name in ('t', 'X', 'Xdot', 'U'):
            value = np.asarray(getattr(self, name), dtype=float)
            if name != 't':
                value = np.atleast_2d(value)
            object.__setattr__(self, name, value)
        T = self.t.size
        for name in ('X', 'Xdot', 'U'):
            value = getattr(self, name)
            if value.shape[1] != T:
                raise DimensionMismatchError(f'{name} has {value.shape[1]} columns, expected {T} samples')
            if not np.all(np.isfinite(value)):
                raise ValueError(f'{name} contains non-finite entries')
        if self.X.shape != self.Xdot.shape:
            raise DimensionMismatchError(f'X is {self.X.shape}, Xdot is {self.Xdot.shape}')

    @property
    def T(self) -> int:
        return self.t.size

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.U.shape[0]


@dataclass(frozen=True)
class NoiseBound:
    """Energy bound ``sum_i ||w(t_i)||^2 <= phi11``."""
    phi11: float

    def __post_init__(self):
        if not self.phi11 >= 0:
            raise ValueError(f'phi11 must be non-negative, got {self.phi11}')

    @classmethod
    def from_radius(cls, omega: float, T: int) -> 'NoiseBound':
        """Every sample in the ball of radius ``omega``: ``phi11 = omega^2 T``."""
        return cls(float(omega) ** 2 * T)

    @classmethod
    def from_sample_bound(cls, omega: float, T: int) -> 'NoiseBound':
        """Every sample with ``||w(t_i)||^2 <= omega``: ``phi11 = omega T``."""
        return cls(float(omega) * T)


@dataclass(frozen=True, eq=False)
class DataMatrices:
    F: np.ndarray
    GU: np.ndarray
    X: np.ndarray
    Xdot: np.ndarray
    D: np.ndarray
    xi: np.ndarray
    singular_values: np.ndarray

    @property
    def T(self) -> int:
        return self.F.shape[1]

    @property
    def ell(self) -> int:
        return self.D.shape[0]


def build_data_matrices(shape: PlantShape, dataset: Dataset) -> DataMatrices:
    """Evaluate ``F`` and ``G u`` at the samples and assemble ``D``.

    Column ``i`` of ``GU`` is ``G(x(t_i)) u(t_i)``.

    Raises:
        DataRankError: ``[F; GU]`` does not have full row rank (smallest
            singular value at most ``RANK_TOL`` times the largest).
    """
    if dataset.n != shape.n:
        raise DimensionMismatchError(f'dataset has {dataset.n} states, plant has {shape.n}')
    if dataset.m != shape.m:
        raise DimensionMismatchError(f'dataset has {dataset.m} inputs, plant has {shape.m}')
    points = dataset.X.T
    F = shape.F.evaluate_many(points)[:, :, 0].T
    GU = np.einsum('tgm,mt->gt', shape.G.evaluate_many(points), dataset.U)

    stacked = np.vstack([F, GU])
    required = shape.f + shape.g
    singular = np.linalg.svd(stacked, compute_uv=False)
    top = singular[0] if singular.size else 0.0
    if dataset.T < required or top == 0.0 or np.sum(singular > RANK_TOL * top) < required:
        raise DataRankError(singular, required)

    n1, n2, f, g, T = shape.n1, shape.n2, shape.f, shape.g, dataset.T
    D = np.zeros((shape.ell, shape.n * T))
    D[:n1 * f, :n1 * T] = np.kron(np.eye(n1), F)
    D[n1 * f:n1 * f + n2 * f, n1 * T:] = np.kron(np.eye(n2), F)
    D[n1 * f + n2 * f:, n1 * T:] = np.kron(np.eye(n2), GU)
    xi = dataset.Xdot.ravel()
    logger.debug(f"Data matrices: T={T}, ell={shape.ell}, smallest singular value {singular[-1]:.3e}")
    return DataMatrices(F, GU, dataset.X, dataset.Xdot, D, xi, singular)


@dataclass(frozen=True, eq=False)
class QmiSet:
    """``Z(N) = {z : [1; z]^T N [1; z] >= 0}`` with its Schur data precomputed."""
    N: np.ndarray
    schur: float
    center: np.ndarray
    neg_inv: np.ndarray
    neg_inv_sqrt: np.ndarray
    details: dict = field(default_factory=dict)

    @property
    def ell(self) -> int:
        return self.N.shape[0] - 1

    @property
    def N11(self) -> float:
        return float(self.N[0, 0])

    @property
    def N12(self) -> np.ndarray:
        return self.N[0, 1:]

    @property
    def N21(self) -> np.ndarray:
        return self.N[1:, 0]

    @property
    def N22(self) -> np.ndarray:
        return self.N[1:, 1:]

    @property
    def schur_sqrt(self) -> float:
        return float(np.sqrt(max(self.schur, 0.0)))

    def to_dict(self) -> dict:
        return {
            'ell': self.ell,
            'schur': self.schur,
            'center': [float(c) for c in self.center],
            **self.details,
        }


def qmi_from_matrix(N: np.ndarray, **details) -> QmiSet:
    """Partition a symmetric ``N`` and derive center, Schur scalar and ``(-N22)^(-1/2)``.

    Raises:
        QmiError: ``N22`` is not negative definite, or ``N | N22`` is below
            ``-SCHUR_TOL`` (the set is empty).
    """
    N = np.asarray(N, dtype=float)
    N = (N + N.T) / 2
    if N.shape[0] < 2:
        raise QmiError(f'N must be at least 2x2, got {N.shape}')
    eigenvalues, vectors = np.linalg.eigh(-N[1:, 1:])
    top = max(float(eigenvalues.max()), 1.0)
    if eigenvalues.min() <= EIGEN_FLOOR * top:
        raise QmiError(f'N22 is not negative definite (largest eigenvalue {-eigenvalues.min():.3e})')
    clamped = np.maximum(eigenvalues, EIGEN_FLOOR)
    neg_inv = (vectors / clamped) @ vectors.T
    neg_inv_sqrt = (vectors / np.sqrt(clamped)) @ vectors.T
    center = neg_inv @ N[1:, 0]
    schur = float(N[0, 0] + N[0, 1:] @ center)
    if schur < -SCHUR_TOL:
        raise QmiError(f'the compatible set is empty: N | N22 = {schur:.3e}')
    if schur < 0:
        schur = 0.0
    return QmiSet(N, schur, center, neg_inv, neg_inv_sqrt, details)


def _qmi(xi: np.ndarray, D: np.ndarray, noise: NoiseBound, **details) -> QmiSet:
    N = np.empty((1 + D.shape[0], 1 + D.shape[0]))
    N[0, 0] = noise.phi11 - xi @ xi
    N[1:, 0] = D @ xi
    N[0, 1:] = N[1:, 0]
    N[1:, 1:] = -D @ D.T
    return qmi_from_matrix(N, phi11=noise.phi11, **details)


def build_qmi(data: DataMatrices, noise: NoiseBound) -> QmiSet:
    qmi = _qmi(data.xi, data.D, noise, min_singular_value=float(data.singular_values[-1]))
    logger.info(f"Compatible set: ell={qmi.ell}, N|N22={qmi.schur:.6g}, phi11={noise.phi11:.6g}")
    return qmi


@dataclass
class Membership:
    in_sigma: bool
    slack: float


def membership_slack(qmi: QmiSet, v: np.ndarray) -> float:
    """``[1; v]^T N [1; v]`` written around the center as ``schur - (v - c)^T (-N22) (v - c)``."""
    v = np.asarray(v, dtype=float).ravel()
    if v.size != qmi.ell:
        raise DimensionMismatchError(f'parameter vector has {v.size} entries, expected {qmi.ell}')
    d = v - qmi.center
    return float(qmi.schur + d @ qmi.N22 @ d)


def membership_check(qmi: QmiSet, A1, A2, B2, tol: float = SCHUR_TOL) -> Membership:
    slack = membership_slack(qmi, stack_parameters(A1, A2, B2))
    return Membership(slack >= -tol, slack)


def map_entry_to_index(which: Union[ParameterMatrix, str], row: int, col: int, shape: PlantShape) -> int:
    """1-based position of ``A1(row, col)``, ``A2(row, col)`` or ``B2(row, col)`` in ``v``."""
    which = ParameterMatrix(str(which))
    n1, n2, f, g = shape.n1, shape.n2, shape.f, shape.g
    rows, cols, offset = {
        ParameterMatrix.A1: (n1, f, 0),
        ParameterMatrix.A2: (n2, f, n1 * f),
        ParameterMatrix.B2: (n2, g, n1 * f + n2 * f),
    }[which]
    if not (1 <= row <= rows and 1 <= col <= cols):
        raise IndexError(f'{which}({row}, {col}) is outside a {rows}x{cols} matrix')
    return offset + (row - 1) * cols + col


def index_to_entry(index: int, shape: PlantShape) -> Tuple[ParameterMatrix, int, int]:
    n1, n2, f, g = shape.n1, shape.n2, shape.f, shape.g
    if not 1 <= index <= shape.ell:
        raise IndexError(f'index {index} is outside 1..{shape.ell}')
    k = index - 1
    for which, rows, cols in ((ParameterMatrix.A1, n1, f), (ParameterMatrix.A2, n2, f),
                              (ParameterMatrix.B2, n2, g)):
        if k < rows * cols:
            return which, k // cols + 1, k % cols + 1
        k -= rows * cols
    raise IndexError(index)


@dataclass(frozen=True, eq=False)
class PriorKnowledge:
    """Known entries of ``v``: 1-based sorted indices ``alpha`` and their values."""
    ell: int
    alpha: Tuple[int, ...] = ()
    v_alpha: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        alpha = tuple(int(a) for a in self.alpha)
        values = np.asarray(self.v_alpha, dtype=float).ravel()
        if len(alpha) != values.size:
            raise DimensionMismatchError(f'{len(alpha)} known indices but {values.size} values')
        if len(set(alpha)) != len(alpha):
            raise ValueError(f'duplicate known indices in {alpha}')
        if any(not 1 <= a <= self.ell for a in alpha):
            raise IndexError(f'known indices must lie in 1..{self.ell}, got {alpha}')
        order = np.argsort(alpha, kind='stable')
        object.__setattr__(self, 'alpha', tuple(alpha[i] for i in order))
        object.__setattr__(self, 'v_alpha', values[order])

    @classmethod
    def from_entries(cls, shape: PlantShape,
                     entries: Iterable[Tuple[Union[ParameterMatrix, str], int, int, float]]) -> 'PriorKnowledge':
        entries = list(entries)
        alpha = [map_entry_to_index(which, row, col, shape) for which, row, col, _ in entries]
        return cls(shape.ell, tuple(alpha), np.array([value for *_, value in entries], dtype=float))

    @property
    def alpha_hat(self) -> Tuple[int, ...]:
        known = set(self.alpha)
        return tuple(k for k in range(1, self.ell + 1) if k not in known)

    @property
    def gamma(self) -> int:
        return self.ell - len(self.alpha)

    def split(self, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """``(v_alpha, v_alpha_hat)`` from a full parameter vector."""
        v = np.asarray(v, dtype=float).ravel()
        return v[[a - 1 for a in self.alpha]], v[[a - 1 for a in self.alpha_hat]]

    def combine(self, v_hat: np.ndarray) -> np.ndarray:
        """Full ``v`` from the unknown part, known entries filled in."""
        v = np.zeros(self.ell)
        v[[a - 1 for a in self.alpha]] = self.v_alpha
        v[[a - 1 for a in self.alpha_hat]] = np.asarray(v_hat, dtype=float).ravel()
        return v


def build_prior_qmi(data: DataMatrices, noise: NoiseBound, prior: PriorKnowledge) -> Optional[QmiSet]:
    """``N_hat`` over the unknown entries: ``xi`` shifted by ``D_alpha^T v_alpha``, rows ``alpha_hat`` of ``D``.

    Returns ``None`` when every entry is known.

    Raises:
        DataRankError: ``D_alpha_hat`` does not have full row rank.
    """
    if prior.ell != data.ell:
        raise DimensionMismatchError(f'prior knowledge is for ell={prior.ell}, data give ell={data.ell}')
    known = [a - 1 for a in prior.alpha]
    unknown = [a - 1 for a in prior.alpha_hat]
    xi = data.xi - data.D[known].T @ prior.v_alpha
    if not unknown:
        return None
    D_hat = data.D[unknown]
    singular = np.linalg.svd(D_hat, compute_uv=False)
    if singular[-1] <= RANK_TOL * singular[0]:
        raise DataRankError(singular, len(unknown))
    qmi = _qmi(xi, D_hat, noise, min_singular_value=float(data.singular_values[-1]),
               alpha_hat=list(prior.alpha_hat))
    logger.info(f"Compatible set with prior knowledge: gamma={qmi.ell}, N|N22={qmi.schur:.6g}")
    return qmi


def prior_residual(data: DataMatrices, noise: NoiseBound, prior: PriorKnowledge) -> float:
    """``phi11 - ||xi - D_alpha^T v_alpha||^2``: the slack left when every entry is known."""
    known = [a - 1 for a in prior.alpha]
    xi = data.xi - data.D[known].T @ prior.v_alpha
    return float(noise.phi11 - xi @ xi)


@dataclass
class SLemmaResult:
    certified: bool
    min_eigenvalue: float


def slemma_matrix(qmi: QmiSet, lam: np.ndarray, a: float) -> np.ndarray:
    """``[[lam^T c + a, s^(1/2) lam^T], [s^(1/2) lam, (lam^T c + a)(-N22)]]`` with center ``c``."""
    lam = np.asarray(lam, dtype=float).ravel()
    if lam.size != qmi.ell:
        raise DimensionMismatchError(f'lambda has {lam.size} entries, expected {qmi.ell}')
    top = float(lam @ qmi.center + a)
    r = qmi.schur_sqrt
    matrix = np.empty((1 + qmi.ell, 1 + qmi.ell))
    matrix[0, 0] = top
    matrix[0, 1:] = r * lam
    matrix[1:, 0] = r * lam
    matrix[1:, 1:] = -top * qmi.N22
    return matrix


def slemma_check(qmi: QmiSet, lam: np.ndarray, a: float, tol: float = SLEMMA_TOL) -> SLemmaResult:
    """Exact test of ``lam^T z + a >= 0`` for all ``z`` in the set, as one PSD check."""
    eigenvalue = float(np.linalg.eigvalsh(slemma_matrix(qmi, lam, a)).min())
    return SLemmaResult(eigenvalue >= -tol, eigenvalue)


def sample_compatible(qmi: QmiSet, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform draws from the ellipsoid ``c + s^(1/2) (-N22)^(-1/2) B``; shape ``(count, ell)``."""
    directions = rng.standard_normal((count, qmi.ell))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = rng.uniform(size=(count, 1)) ** (1.0 / qmi.ell)
    return qmi.center + qmi.schur_sqrt * (radii * directions) @ qmi.neg_inv_sqrt.T
