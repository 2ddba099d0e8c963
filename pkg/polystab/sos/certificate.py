"""Gram certificates for matrix SOS constraints and their independent check."""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from polystab.models.types import CheckResult
from polystab.poly.matrix import PolynomialMatrix
from polystab.poly.polynomial import Monomial, Polynomial, mono_mul
from polystab.poly.space import VariableSpace
from polystab.utils.exceptions import DimensionMismatchError


@dataclass(frozen=True)
class GramBasis:
    """Monomial basis of a (possibly scalarized) matrix SOS constraint.

    ``blocks[i]`` lists the x/y-monomials that multiply the auxiliary
    coordinate ``z_i``. A 1x1 constraint has a single block and no
    auxiliary variable.
    """
    space: VariableSpace
    blocks: Tuple[Tuple[Monomial, ...], ...]

    @property
    def size(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def offsets(self) -> List[int]:
        offsets, total = [], 0
        for b in self.blocks:
            offsets.append(total)
            total += len(b)
        return offsets

    def elements(self) -> List[Tuple[int, Monomial]]:
        return [(i, m) for i, block in enumerate(self.blocks) for m in block]

    def scalar_monomials(self) -> List[Monomial]:
        """Basis monomials over ``(x, y, z)``, one z-coordinate each; plain monomials for 1x1."""
        if len(self.blocks) == 1:
            return list(self.blocks[0])
        q = len(self.blocks)
        return [m + tuple(int(k == i) for k in range(q)) for i, m in self.elements()]

    def to_text(self) -> List[str]:
        names = self.space.names
        scalar = len(self.blocks) == 1
        texts = []
        for i, m in self.elements():
            factors = [n if e == 1 else f'{n}^{e}' for n, e in zip(names, m) if e]
            if not scalar:
                factors.append(f'z_{i + 1}')
            texts.append('*'.join(factors) or '1')
        return texts


def gram_residual(matrix: PolynomialMatrix, basis: GramBasis, gram: np.ndarray) -> PolynomialMatrix:
    """``matrix - B(x)^T G B(x)`` blockwise, where ``B`` places ``blocks[i]`` in column ``i``."""
    q = matrix.rows
    if len(basis.blocks) != q:
        raise DimensionMismatchError(f'basis has {len(basis.blocks)} blocks, matrix is {q}x{q}')
    gram = np.asarray(gram, dtype=float)
    if gram.shape != (basis.size, basis.size):
        raise DimensionMismatchError(f'Gram matrix is {gram.shape}, basis has {basis.size} elements')
    offsets = basis.offsets

    def block(i: int, j: int) -> Polynomial:
        terms: Dict[Monomial, float] = {}
        for a, ma in enumerate(basis.blocks[i]):
            for b, mb in enumerate(basis.blocks[j]):
                value = gram[offsets[i] + a, offsets[j] + b]
                if value != 0.0:
                    m = mono_mul(ma, mb)
                    terms[m] = terms.get(m, 0.0) + value
        return matrix.entry(i, j) - Polynomial(matrix.space, terms)

    return PolynomialMatrix.symmetric(matrix.space, q, block)


@dataclass
class GramBlock:
    label: str
    basis: GramBasis
    gram: np.ndarray
    residual: PolynomialMatrix

    @classmethod
    def from_gram(cls, label: str, matrix: PolynomialMatrix, basis: GramBasis, gram: np.ndarray) -> 'GramBlock':
        gram = np.asarray(gram, dtype=float)
        gram = (gram + gram.T) / 2
        return cls(label, basis, gram, gram_residual(matrix, basis, gram).pruned())

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.gram).min()) if self.gram.size else math.inf

    @property
    def max_residual(self) -> float:
        return max(e.max_coefficient() for e in self.residual.entries)

    def to_dict(self) -> dict:
        return {
            'label': self.label,
            'basis': self.basis.to_text(),
            'gram': self.gram.tolist(),
            'min_eigenvalue': self.min_eigenvalue,
            'max_residual': self.max_residual,
        }


@dataclass
class GramCertificate:
    blocks: List[GramBlock] = field(default_factory=list)

    def block(self, label: str) -> GramBlock:
        for b in self.blocks:
            if b.label == label:
                return b
        raise KeyError(label)

    def to_dict(self) -> dict:
        return {'constraints': [b.to_dict() for b in self.blocks]}


@dataclass
class SosReport:
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def min_eigenvalue(self) -> float:
        return min((c.details['min_eigenvalue'] for c in self.checks), default=math.inf)

    @property
    def max_residual(self) -> float:
        return max((c.details['max_residual'] for c in self.checks), default=0.0)

    def to_dict(self) -> dict:
        return {
            'passed': self.passed,
            'min_eigenvalue': self.min_eigenvalue,
            'max_residual': self.max_residual,
            'constraints': [c.to_dict() for c in self.checks],
        }


def verify_sos(certificate: GramCertificate, psd_tol: float = 1e-7, residual_tol: float = 1e-6) -> SosReport:
    """Re-check every Gram block with a fresh eigensolve and the recomputed residual.

    A block passes when its smallest Gram eigenvalue is at least ``-psd_tol``
    and no residual coefficient exceeds ``residual_tol``. Never raises.
    """
    checks = []
    for block in certificate.blocks:
        eig = block.min_eigenvalue
        residual = block.max_residual
        passed = eig >= -psd_tol and residual <= residual_tol
        checks.append(CheckResult(
            name=block.label,
            passed=passed,
            worst_value=min(eig, 0.0) if eig < -psd_tol else residual,
            tolerance=residual_tol,
            details={'min_eigenvalue': eig, 'max_residual': residual, 'basis_size': block.basis.size},
        ))
    return SosReport(checks)
