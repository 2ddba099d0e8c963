"""Controller ``K = L P^-1 Z`` and Lyapunov function ``V = Z^T P^-1 Z`` from a certificate.

Numeric evaluators solve ``P(x1) w = Z(x)`` at each point and work for any
``p``. For ``p <= MAX_SYMBOLIC_SIZE`` the rational forms ``eta / det P`` and
``xi / det P`` are also built through the polynomial adjugate.
"""
import logging
from typing import Optional

import numpy as np

from polystab.poly.matrix import MAX_SYMBOLIC_SIZE, PolynomialMatrix
from polystab.poly.polynomial import Polynomial
from polystab.synthesis.plant import PlantModel, StructureChoice
from polystab.utils.exceptions import DimensionMismatchError, StructureError, SymbolicUnavailableError

logger = logging.getLogger(__name__)


class ControllerLyapunov:
    def __init__(self, structure: StructureChoice, P: PolynomialMatrix, L: PolynomialMatrix):
        space = structure.space
        if P.shape != (structure.p, structure.p):
            raise DimensionMismatchError(f'P must be {structure.p}x{structure.p}, got {P.shape}')
        if L.cols != structure.p:
            raise DimensionMismatchError(f'L must have {structure.p} columns, got {L.cols}')
        self.space = space
        self.Z = structure.Z
        self.P = P
        self.L = L
        self._dZ = [self.Z.diff(k) for k in range(space.n)]
        self._dP = [P.diff(k) for k in range(space.n)]

        self.det: Optional[Polynomial] = None
        self.adj: Optional[PolynomialMatrix] = None
        self.eta: Optional[Polynomial] = None
        self.xi: Optional[PolynomialMatrix] = None
        if structure.p <= MAX_SYMBOLIC_SIZE:
            self.adj = P.adjugate()
            self.det = P.determinant()
            self.eta = (self.Z.T @ self.adj @ self.Z).as_scalar()
            self.xi = L @ self.adj @ self.Z
            if any(not e.constant_term() == 0.0 for e in self.xi.entries):
                raise StructureError('controller numerator does not vanish at the origin; Z(0) must be 0')
        else:
            logger.info(f"p = {structure.p} exceeds {MAX_SYMBOLIC_SIZE}; only numeric K and V are available")

        origin = np.zeros((1, space.dim))
        if np.any(np.abs(self.control(origin)) > 0.0):
            raise StructureError('K(0) is not zero; Z(0) must be 0')

    @property
    def symbolic(self) -> bool:
        return self.det is not None

    def _points(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.space.dim:
            raise DimensionMismatchError(f'points must have {self.space.dim} columns, got {points.shape[1]}')
        return points

    def solve_w(self, points) -> np.ndarray:
        """``w = P(x1)^-1 Z(x)`` per point; shape ``(N, p)``."""
        points = self._points(points)
        P = self.P.evaluate_many(points)
        Z = self.Z.evaluate_many(points)
        return np.linalg.solve(P, Z)[:, :, 0]

    def value(self, points) -> np.ndarray:
        points = self._points(points)
        Z = self.Z.evaluate_many(points)[:, :, 0]
        return np.einsum('ni,ni->n', Z, self.solve_w(points))

    def control(self, points) -> np.ndarray:
        """``K(x)`` per point; shape ``(N, m)``."""
        points = self._points(points)
        L = self.L.evaluate_many(points)
        return np.einsum('nij,nj->ni', L, self.solve_w(points))

    def gradient(self, points) -> np.ndarray:
        """Exact ``dV/dx_k = 2 w^T dZ/dx_k - w^T (dP/dx_k) w``; shape ``(N, n)``."""
        points = self._points(points)
        w = self.solve_w(points)
        columns = []
        for dZ, dP in zip(self._dZ, self._dP):
            dz = dZ.evaluate_many(points)[:, :, 0]
            dp = dP.evaluate_many(points)
            columns.append(2 * np.einsum('ni,ni->n', w, dz) - np.einsum('ni,nij,nj->n', w, dp, w))
        return np.stack(columns, axis=1)

    def closed_loop(self, plant: PlantModel, points) -> np.ndarray:
        """``f(x) = A F(x) + B G(x) K(x)`` per point."""
        points = self._points(points)
        return plant.field(points, self.control(points))

    def value_rational(self, points) -> np.ndarray:
        self._require_symbolic()
        points = self._points(points)
        return self.eta.evaluate_many(points) / self.det.evaluate_many(points)

    def control_rational(self, points) -> np.ndarray:
        self._require_symbolic()
        points = self._points(points)
        return self.xi.evaluate_many(points)[:, :, 0] / self.det.evaluate_many(points)[:, None]

    def _require_symbolic(self):
        if not self.symbolic:
            raise SymbolicUnavailableError(f'symbolic K and V need p <= {MAX_SYMBOLIC_SIZE}')
