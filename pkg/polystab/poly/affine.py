"""Coefficients that are affine in SOS decision variables.

A polynomial coefficient is either a plain float or an :class:`AffineForm`
``const + sum_k coefs[k] * d_k`` over global decision indices ``d_k``.
Arithmetic keeps forms affine: multiplying two non-constant forms raises
:class:`NonAffineError`. Forms with no decision part collapse back to floats.
"""
from typing import Dict, Mapping, Union

import numpy as np

from polystab.utils.exceptions import NonAffineError


class AffineForm:
    __slots__ = ('const', 'coefs')

    def __init__(self, const: float = 0.0, coefs: Mapping[int, float] = None):
        self.const = float(const)
        self.coefs: Dict[int, float] = {k: float(v) for k, v in (coefs or {}).items() if v != 0.0}

    @classmethod
    def decision(cls, index: int, scale: float = 1.0) -> 'AffineForm':
        return cls(0.0, {index: scale})

    def __repr__(self) -> str:
        parts = [f'{v!r}*d{k}' for k, v in sorted(self.coefs.items())]
        return f'AffineForm({self.const!r} + {" + ".join(parts)})'

    def __eq__(self, other) -> bool:
        if isinstance(other, AffineForm):
            return self.const == other.const and self.coefs == other.coefs
        return False

    __hash__ = None

    def __neg__(self) -> 'AffineForm':
        return AffineForm(-self.const, {k: -v for k, v in self.coefs.items()})

    def evaluate(self, values: np.ndarray) -> float:
        total = self.const
        for k in sorted(self.coefs):
            total += self.coefs[k] * float(values[k])
        return total

    def max_abs(self) -> float:
        return max([abs(self.const), *map(abs, self.coefs.values())])


Coef = Union[float, AffineForm]


def normalize(const: float, coefs: Dict[int, float]) -> Coef:
    coefs = {k: v for k, v in coefs.items() if v != 0.0}
    if not coefs:
        return float(const)
    form = AffineForm.__new__(AffineForm)
    form.const = float(const)
    form.coefs = coefs
    return form


def coef_add(a: Coef, b: Coef) -> Coef:
    if isinstance(a, AffineForm):
        if isinstance(b, AffineForm):
            coefs = dict(a.coefs)
            for k, v in b.coefs.items():
                coefs[k] = coefs.get(k, 0.0) + v
            return normalize(a.const + b.const, coefs)
        return normalize(a.const + b, dict(a.coefs))
    if isinstance(b, AffineForm):
        return normalize(a + b.const, dict(b.coefs))
    return a + b


def coef_neg(a: Coef) -> Coef:
    return -a


def coef_sub(a: Coef, b: Coef) -> Coef:
    return coef_add(a, coef_neg(b))


def coef_mul(a: Coef, b: Coef) -> Coef:
    if isinstance(a, AffineForm):
        if isinstance(b, AffineForm):
            raise NonAffineError(f'product of decision-dependent coefficients {a!r} and {b!r}')
        return normalize(a.const * b, {k: v * b for k, v in a.coefs.items()})
    if isinstance(b, AffineForm):
        return normalize(a * b.const, {k: v * a for k, v in b.coefs.items()})
    return a * b


def is_zero(a: Coef) -> bool:
    return not isinstance(a, AffineForm) and a == 0.0


def is_numeric(a: Coef) -> bool:
    return not isinstance(a, AffineForm)


def substitute(a: Coef, values: np.ndarray) -> float:
    return a.evaluate(values) if isinstance(a, AffineForm) else a


def magnitude(a: Coef) -> float:
    return a.max_abs() if isinstance(a, AffineForm) else abs(a)
