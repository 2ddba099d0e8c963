import enum
from dataclasses import dataclass, field
from typing import List, Optional, Tuple



class VariableGroup(enum.Enum):
    X1 = 'x1'
    X2 = 'x2'
    Y = 'y'
    Z = 'z'
    ALL = 'all'

    def __str__(self) -> str:
        return self.name


class ShapeKind(enum.Enum):
    SCALAR = 0
    SYMMETRIC = 1
    RECTANGULAR = 2

    def __str__(self) -> str:
        return self.name


class Objective(enum.Enum):
    FEASIBILITY = 0
    MAX_MARGIN = 1

    def __str__(self) -> str:
        return self.name


class SolveStatus(enum.Enum):
    OPTIMAL = 0
    FEASIBLE = 1
    INACCURATE = 2
    INFEASIBLE = 10
    UNBOUNDED = 11
    TIME_LIMIT = 20
    FAILED = 21

    def __str__(self) -> str:
        return self.name

    @property
    def has_values(self) -> bool:
        return self in (SolveStatus.OPTIMAL, SolveStatus.FEASIBLE, SolveStatus.INACCURATE)


class AssumptionCheck(enum.Enum):
    ANALYTIC = 0
    SAMPLED = 1
    VIOLATED = 2

    def __str__(self) -> str:
        return self.name


class ConditionStatus(enum.Enum):
    CERTIFIED = 0
    SAMPLED_ONLY = 1
    REJECTED = 2

    def __str__(self) -> str:
        return self.name

    @property
    def accepted(self) -> bool:
        return self is not ConditionStatus.REJECTED


class ParameterMatrix(enum.Enum):
    A1 = 'A1'
    A2 = 'A2'
    B2 = 'B2'

    def __str__(self) -> str:
        return self.name


class ExitCode(enum.IntEnum):
    OK = 0
    ERROR = 1
    INFEASIBLE = 2
    VERIFICATION_FAILED = 3


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst_value: float = 0.0
    worst_point: Optional[Tuple[float, ...]] = None
    tolerance: float = 0.0
    details: dict = field(default_factory=dict)

    def __str__(self) -> str:
        verdict = 'pass' if self.passed else 'FAIL'
        return f"CheckResult(name={self.name}, {verdict}, worst={self.worst_value:.3e})"

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'passed': self.passed,
            'worst_value': float(self.worst_value),
            'worst_point': list(self.worst_point) if self.worst_point is not None else None,
            'tolerance': self.tolerance,
            **({'details': self.details} if self.details else {}),
        }


@dataclass
class CheckReport:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {'passed': self.passed, 'checks': [c.to_dict() for c in self.checks]}
