"""Solver-agnostic semidefinite programs in equality standard form.

::

    minimize    c . v
    subject to  A v = b,   X_k PSD for every block k

The variable vector ``v`` lists the upper-triangular entries of each PSD
block (row-major, ``i <= j``), then the free variables. A row coefficient on
an off-diagonal entry multiplies the single value ``X_ij = X_ji``.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import sparse

from polystab.models.types import SolveStatus
from polystab.utils.exceptions import DimensionMismatchError


@dataclass(frozen=True)
class PsdBlock:
    label: str
    size: int

    @property
    def n_entries(self) -> int:
        return self.size * (self.size + 1) // 2


def tri_index(size: int, i: int, j: int) -> int:
    if i > j:
        i, j = j, i
    return i * size - i * (i - 1) // 2 + (j - i)


@dataclass
class ConicProgram:
    blocks: List[PsdBlock] = field(default_factory=list)
    n_free: int = 0
    row_index: List[int] = field(default_factory=list)
    col_index: List[int] = field(default_factory=list)
    values: List[float] = field(default_factory=list)
    rhs: List[float] = field(default_factory=list)
    objective: Dict[int, float] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def add_block(self, label: str, size: int) -> int:
        self.blocks.append(PsdBlock(label, size))
        return len(self.blocks) - 1

    def add_free(self, count: int = 1) -> int:
        start = self.n_free
        self.n_free += count
        return start

    @property
    def block_offsets(self) -> List[int]:
        offsets, total = [], 0
        for block in self.blocks:
            offsets.append(total)
            total += block.n_entries
        return offsets

    @property
    def n_block_vars(self) -> int:
        return sum(b.n_entries for b in self.blocks)

    @property
    def n_vars(self) -> int:
        return self.n_block_vars + self.n_free

    @property
    def n_rows(self) -> int:
        return len(self.rhs)

    def entry_var(self, block: int, i: int, j: int, offsets: Optional[List[int]] = None) -> int:
        offsets = offsets or self.block_offsets
        return offsets[block] + tri_index(self.blocks[block].size, i, j)

    def free_var(self, k: int) -> int:
        return self.n_block_vars + k

    def add_row(self, coefs: Dict[int, float], rhs: float):
        """Append ``sum coefs[var] * v[var] = rhs``; variable indices are global."""
        row = len(self.rhs)
        for var in sorted(coefs):
            value = coefs[var]
            if value != 0.0:
                self.row_index.append(row)
                self.col_index.append(var)
                self.values.append(float(value))
        self.rhs.append(float(rhs))

    def equality_matrix(self) -> sparse.csr_matrix:
        return sparse.csr_matrix(
            (self.values, (self.row_index, self.col_index)), shape=(self.n_rows, self.n_vars))

    def objective_vector(self) -> np.ndarray:
        c = np.zeros(self.n_vars)
        for var, value in self.objective.items():
            c[var] = value
        return c

    def validate(self):
        n = self.n_vars
        if any(not 0 <= v < n for v in self.col_index):
            raise DimensionMismatchError('equality row references an undeclared variable')
        if any(not 0 <= r < self.n_rows for r in self.row_index):
            raise DimensionMismatchError('equality entry references a missing row')
        if any(not 0 <= v < n for v in self.objective):
            raise DimensionMismatchError('objective references an undeclared variable')
        finite = [*self.values, *self.rhs, *self.objective.values()]
        if not all(math.isfinite(v) for v in finite):
            raise ValueError('conic program has non-finite coefficients')

    def pack(self, blocks: List[np.ndarray], free: np.ndarray) -> np.ndarray:
        """Flatten block matrices and free values into the variable vector."""
        v = np.zeros(self.n_vars)
        offset = 0
        for block, X in zip(self.blocks, blocks):
            iu = np.triu_indices(block.size)
            v[offset:offset + block.n_entries] = np.asarray(X)[iu]
            offset += block.n_entries
        v[offset:] = free
        return v

    def unpack(self, v: np.ndarray) -> Tuple[List[np.ndarray], np.ndarray]:
        blocks, offset = [], 0
        for block in self.blocks:
            X = np.zeros((block.size, block.size))
            iu = np.triu_indices(block.size)
            X[iu] = v[offset:offset + block.n_entries]
            X = X + np.triu(X, 1).T
            blocks.append(X)
            offset += block.n_entries
        return blocks, np.asarray(v[offset:], dtype=float)


@dataclass
class ConicSolution:
    status: SolveStatus
    blocks: Optional[List[np.ndarray]] = None
    free: Optional[np.ndarray] = None
    objective_value: Optional[float] = None
    iterations: Optional[int] = None
    solve_time: Optional[float] = None
    solver: str = ''
    message: str = ''

    def __post_init__(self):
        if not self.status.has_values:
            self.blocks = None
            self.free = None

    @property
    def has_values(self) -> bool:
        return self.status.has_values and self.blocks is not None


@dataclass
class MarginReport:
    min_eigenvalue: float
    max_residual: float
    block_eigenvalues: List[float]

    def passes(self, feas_tol: float = 1e-8, psd_tol: float = 1e-8) -> bool:
        return self.max_residual <= feas_tol and self.min_eigenvalue >= -psd_tol

    def to_dict(self) -> dict:
        return {
            'min_eigenvalue': self.min_eigenvalue,
            'max_residual': self.max_residual,
            'block_eigenvalues': self.block_eigenvalues,
        }


def feasibility_margin(solution: ConicSolution, program: ConicProgram) -> MarginReport:
    """Recompute PSD margins and equality residuals without trusting the solver."""
    if not solution.has_values:
        raise ValueError(f'solution with status {solution.status} carries no values')
    eigs = [float(np.linalg.eigvalsh(X).min()) if X.size else math.inf for X in solution.blocks]
    v = program.pack(solution.blocks, solution.free)
    residual = program.equality_matrix() @ v - np.asarray(program.rhs)
    return MarginReport(
        min_eigenvalue=min(eigs, default=math.inf),
        max_residual=float(np.max(np.abs(residual), initial=0.0)),
        block_eigenvalues=eigs,
    )
