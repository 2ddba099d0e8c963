"""SOS programs: unknown polynomial matrices and matrix SOS constraints.

Every unknown coefficient gets a global decision index. Constraints are
polynomial matrices whose coefficients are affine in those indices; the
affine guard in :mod:`polystab.poly.affine` rejects any product of two
unknowns while the constraint is being built.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from polystab.models.types import Objective, ShapeKind, VariableGroup
from polystab.poly.affine import AffineForm
from polystab.poly.matrix import PolynomialMatrix
from polystab.poly.polynomial import Monomial, Polynomial, grlex_key
from polystab.poly.space import VariableSpace

logger = logging.getLogger(__name__)


def monomials_up_to(dim: int, variables: Sequence[int], degree: int,
                    min_degree: int = 0, even_only: bool = False) -> List[Monomial]:
    """All monomials in ``variables`` with total degree in ``[min_degree, degree]``, graded-lex."""
    found = []
    for d in range(min_degree, degree + 1):
        if even_only and d % 2:
            continue
        for combo in itertools.combinations_with_replacement(variables, d):
            exps = [0] * dim
            for k in combo:
                exps[k] += 1
            found.append(tuple(exps))
    return sorted(set(found), key=grlex_key)


@dataclass(frozen=True, eq=False)
class DecisionPolynomial:
    name: str
    kind: ShapeKind
    rows: int
    cols: int
    variables: Tuple[str, ...]
    degree: int
    even_only: bool
    offset: int
    size: int
    monomials: Tuple[Monomial, ...]
    matrix: PolynomialMatrix

    @property
    def indices(self) -> range:
        return range(self.offset, self.offset + self.size)

    def value(self, values) -> PolynomialMatrix:
        """The numeric polynomial matrix for a vector of decision values."""
        return self.matrix.substitute(values)


@dataclass(frozen=True, eq=False)
class SosConstraint:
    label: str
    matrix: PolynomialMatrix
    groups: Tuple[VariableGroup, ...] = (VariableGroup.ALL,)

    def __post_init__(self):
        self.matrix.require_symmetric(self.label)

    @property
    def size(self) -> int:
        return self.matrix.rows


class SosProgram:
    def __init__(self, space: VariableSpace, label: str = 'sos'):
        self.space = space
        self.label = label
        self.decisions: List[DecisionPolynomial] = []
        self.constraints: List[SosConstraint] = []
        self.objective = Objective.FEASIBILITY
        self.margin_cap: Optional[float] = None
        self.n_decision_vars = 0

    def new_decision(self, name: str, kind: ShapeKind, rows: int = 1, cols: int = 1, *,
                     variables: Optional[Iterable[str]] = None, degree: int = 0,
                     min_degree: int = 0, even_only: bool = False) -> DecisionPolynomial:
        """Declare an unknown polynomial matrix of bounded entry degree.

        Args:
            name: Lookup name, unique within the program.
            kind: SCALAR, SYMMETRIC (square, shared coefficients across the
                diagonal) or RECTANGULAR.
            variables: Names the entries may depend on; all state variables
                by default.
            degree: Maximum total degree of each entry.
            min_degree: Minimum total degree of each entry.
            even_only: Keep only monomials of even total degree.
        """
        if any(d.name == name for d in self.decisions):
            raise ValueError(f'decision {name!r} already declared')
        if kind is ShapeKind.SCALAR:
            rows = cols = 1
        if kind is ShapeKind.SYMMETRIC and rows != cols:
            raise ValueError(f'symmetric decision {name!r} must be square, got {rows}x{cols}')
        names = tuple(variables) if variables is not None else self.space.x1 + self.space.x2
        monomials = monomials_up_to(self.space.dim, self.space.indices(names), degree, min_degree, even_only)
        start = self.n_decision_vars
        counter = itertools.count(start)

        def fresh_entry() -> Polynomial:
            return Polynomial(self.space, {m: AffineForm.decision(next(counter)) for m in monomials})

        if kind is ShapeKind.SYMMETRIC:
            matrix = PolynomialMatrix.symmetric(self.space, rows, lambda i, j: fresh_entry())
        else:
            matrix = PolynomialMatrix(self.space, rows, cols, [fresh_entry() for _ in range(rows * cols)])
        self.n_decision_vars = next(counter)
        decision = DecisionPolynomial(
            name=name, kind=kind, rows=rows, cols=cols, variables=names, degree=degree,
            even_only=even_only, offset=start, size=self.n_decision_vars - start,
            monomials=tuple(monomials), matrix=matrix,
        )
        self.decisions.append(decision)
        logger.debug(f"Declared {kind} decision {name} ({rows}x{cols}, degree {degree}, "
                     f"{decision.size} coefficients)")
        return decision

    def decision(self, name: str) -> DecisionPolynomial:
        for d in self.decisions:
            if d.name == name:
                return d
        raise KeyError(name)

    def add_sos(self, label: str, matrix: Union[PolynomialMatrix, Polynomial],
                groups: Tuple[VariableGroup, ...] = (VariableGroup.ALL,)) -> SosConstraint:
        if isinstance(matrix, Polynomial):
            matrix = PolynomialMatrix(self.space, 1, 1, [matrix])
        self.space.require_same(matrix.space)
        constraint = SosConstraint(label, matrix, groups)
        self.constraints.append(constraint)
        return constraint

    def maximize_margin(self, cap: Optional[float] = None):
        """Maximize a uniform margin ``t`` with every Gram matrix minus ``t*I`` PSD."""
        self.objective = Objective.MAX_MARGIN
        self.margin_cap = cap
