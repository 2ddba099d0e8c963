from typing import Iterable, List, Optional, Sequence, Tuple


class PolystabError(Exception):
    def __str__(self):
        return super().__str__()


class PolynomialSyntaxError(PolystabError):
    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        super().__init__(f'{message} at position {position}: {text[:position]}>>{text[position:]}')


class UnknownVariableError(PolystabError):
    def __init__(self, name: str, position: Optional[int] = None):
        self.name = name
        self.position = position
        where = f' at position {position}' if position is not None else ''
        super().__init__(f'Unknown variable {name!r}{where}')


class SpaceMismatchError(PolystabError):
    pass


class DimensionMismatchError(PolystabError):
    pass


class NotSymmetricError(PolystabError):
    pass


class NonAffineError(PolystabError):
    pass


class UnresolvedDecisionError(PolystabError):
    pass


class DegreeMismatchError(PolystabError):
    def __init__(self, monomial: str, label: str = ''):
        self.monomial = monomial
        self.label = label
        where = f' in constraint {label!r}' if label else ''
        super().__init__(f'Monomial {monomial} is outside the span of the Gram basis{where}')


class SymbolicUnavailableError(PolystabError):
    pass


class SolverStatusError(PolystabError):
    def __init__(self, status, message: str = ''):
        self.status = status
        super().__init__(message or f'Solver finished with status {status}')


class InfeasibleError(SolverStatusError):
    pass


class StructureError(PolystabError):
    def __init__(self, message: str, residuals: Sequence[Tuple[int, str]] = ()):
        self.residuals: List[Tuple[int, str]] = list(residuals)
        detail = '; '.join(f'row {row}: {text}' for row, text in self.residuals)
        super().__init__(f'{message}: {detail}' if detail else message)


class EpsilonConditionError(PolystabError):
    pass


class DataRankError(PolystabError):
    def __init__(self, singular_values: Iterable[float], required: int):
        self.singular_values = [float(s) for s in singular_values]
        self.required = required
        super().__init__(
            f'Data not sufficiently rich: need rank {required}, '
            f'singular values {", ".join(f"{s:.3e}" for s in self.singular_values)}'
        )


class QmiError(PolystabError):
    pass


class IntegrationError(PolystabError):
    def __init__(self, reason: str, time: Optional[float] = None):
        self.reason = reason
        self.time = time
        at = f' at t={time:.6g}' if time is not None else ''
        super().__init__(f'Integration failed{at}: {reason}')


class SdpaFormatError(PolystabError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f'line {line}: {message}' if line is not None else message)


class DatasetFormatError(PolystabError):
    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        super().__init__(f'{path}: {message}' if path else message)
