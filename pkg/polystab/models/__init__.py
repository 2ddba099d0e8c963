from polystab.models.types import (
    AssumptionCheck,
    CheckReport,
    CheckResult,
    ConditionStatus,
    ExitCode,
    Objective,
    ParameterMatrix,
    ShapeKind,
    SolveStatus,
    VariableGroup,
)


__all__ = [
    "AssumptionCheck",
    "CheckReport",
    "CheckResult",
    "ConditionStatus",
    "ExitCode",
    "Objective",
    "ParameterMatrix",
    "ShapeKind",
    "SolveStatus",
    "VariableGroup",
]
