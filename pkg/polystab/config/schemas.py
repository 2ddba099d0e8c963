"""Pydantic models for problem, experiment and certificate files.

Files are JSON or YAML; both are read through ``yaml.safe_load``. Polynomial
entries are strings in the expression grammar of ``polystab.poly.parser``;
bare numbers are accepted and converted to their text form.
"""
from typing import Annotated, Any, List, Literal, Optional

from pydantic import BaseModel, BeforeValidator, Field, model_validator


def _as_text(value: Any) -> Any:
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return repr(float(value))
    return value


PolyText = Annotated[str, BeforeValidator(_as_text)]
Matrix = List[List[float]]


class VariablesSpec(BaseModel):
    x1: List[str] = []
    x2: List[str]


class PlantSpec(BaseModel):
    F: List[PolyText]
    G: List[List[PolyText]] = [['1']]
    A1: Optional[Matrix] = None
    A2: Optional[Matrix] = None
    B2: Optional[Matrix] = None

    @property
    def has_model(self) -> bool:
        return self.A1 is not None and self.A2 is not None and self.B2 is not None


class SystemSpec(BaseModel):
    A1: Matrix
    A2: Matrix
    B2: Matrix


class StructureSpec(BaseModel):
    Z: List[PolyText]
    H: List[List[PolyText]]


class EpsilonSpec(BaseModel):
    eps1: float = Field(gt=0)
    eps2: PolyText
    eps3: PolyText
    c: Optional[float] = None
    r: Optional[float] = None


class DegreeSpec(BaseModel):
    P: int = Field(ge=0)
    L: int = Field(ge=0)
    P_variables: Optional[List[str]] = None
    P_even: bool = False


class GridSpec(BaseModel):
    lower: float = -3.0
    upper: float = 3.0
    points: int = Field(default=21, ge=2)


class NoiseSpec(BaseModel):
    omega: Optional[float] = Field(default=None, ge=0)
    phi11: Optional[float] = Field(default=None, ge=0)
    convention: Literal['radius', 'sample'] = 'radius'

    @model_validator(mode='after')
    def _one_bound(self):
        if (self.omega is None) == (self.phi11 is None):
            raise ValueError('exactly one of omega or phi11 must be given')
        return self


class SamplesSpec(BaseModel):
    t: List[float]
    X: Matrix
    Xdot: Matrix
    U: Matrix


class DataSpec(BaseModel):
    noise: NoiseSpec
    samples: Optional[SamplesSpec] = None


class PriorEntry(BaseModel):
    matrix: Literal['A1', 'A2', 'B2']
    row: int = Field(ge=1)
    col: int = Field(ge=1)
    value: float


class SimulationSpec(BaseModel):
    initial_states: List[List[float]] = []
    random_states: int = Field(default=0, ge=0)
    random_box: float = Field(default=2.0, gt=0)
    horizon: float = Field(default=50.0, gt=0)
    tolerance: float = Field(default=1e-3, gt=0)


class InputTermSpec(BaseModel):
    kind: Literal['sin', 'cos']
    amplitude: float
    frequency: float
    phase: float = 0.0


class InputTableSpec(BaseModel):
    times: List[float]
    values: List[float]

    @model_validator(mode='after')
    def _same_length(self):
        if len(self.times) != len(self.values) or not self.times:
            raise ValueError('input table needs matching, non-empty times and values')
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError('input table times must be strictly increasing')
        return self


class InputSpec(BaseModel):
    terms: List[InputTermSpec] = []
    table: Optional[InputTableSpec] = None


class ExperimentSpec(BaseModel):
    x0: List[float]
    inputs: List[InputSpec]
    horizon: float = Field(gt=0)
    sample_times: List[float]
    omega: float = Field(default=0.0, ge=0)
    seed: int = 0

    @model_validator(mode='after')
    def _sample_times(self):
        times = self.sample_times
        if not times:
            raise ValueError('at least one sample time is required')
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError('sample times must be strictly increasing')
        if times[0] < 0 or times[-1] > self.horizon:
            raise ValueError('sample times must lie within [0, horizon]')
        return self


class ReferenceSpec(BaseModel):
    """Recorded certificate of an example, kept for comparison."""
    P: List[List[PolyText]]
    L: List[List[PolyText]]
    det: Optional[PolyText] = None
    eta: Optional[PolyText] = None
    xi: Optional[List[PolyText]] = None


class ProblemSpec(BaseModel):
    name: str
    variables: VariablesSpec
    plant: PlantSpec
    structure: StructureSpec
    epsilons: EpsilonSpec
    degrees: DegreeSpec
    grid: GridSpec = GridSpec()
    data: Optional[DataSpec] = None
    prior: List[PriorEntry] = []
    true_system: Optional[SystemSpec] = None
    simulation: SimulationSpec = SimulationSpec()
    experiment: Optional[ExperimentSpec] = None
    reference: Optional[ReferenceSpec] = None


class ExperimentFile(BaseModel):
    name: str
    variables: VariablesSpec
    plant: PlantSpec
    experiment: ExperimentSpec

    @model_validator(mode='after')
    def _needs_model(self):
        if not self.plant.has_model:
            raise ValueError('experiment files need plant.A1, plant.A2 and plant.B2')
        return self


class CertificateFile(BaseModel):
    problem: str
    method: Literal['model', 'data', 'prior', 'previous-work', 'reference']
    variables: VariablesSpec
    P: List[List[PolyText]]
    L: List[List[PolyText]]
    status: str
    diagnostics: dict = {}
