"""Problem files: plant, structure, tuning, data and simulation settings in one document."""
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from polystab.config.schemas import ExperimentFile, PlantSpec, ProblemSpec, VariablesSpec
from polystab.dynamics.closed_loop import random_states
from polystab.dynamics.experiment import ExperimentConfig
from polystab.poly import parse_column, parse_matrix, parse_polynomial
from polystab.poly.space import VariableSpace
from polystab.repositories.utils import read_structured
from polystab.synthesis.model import Certificate
from polystab.synthesis.plant import (
    DegreeChoice,
    EpsilonConfig,
    PlantModel,
    PlantShape,
    StructureChoice,
    VerificationGrid,
)
from polystab.synthesis.qmi import (
    DataMatrices,
    Dataset,
    NoiseBound,
    PriorKnowledge,
    QmiSet,
    build_data_matrices,
    build_prior_qmi,
    build_qmi,
)
from polystab.utils.exceptions import QmiError

logger = logging.getLogger(__name__)


def build_space(variables: VariablesSpec) -> VariableSpace:
    return VariableSpace(tuple(variables.x1), tuple(variables.x2))


def build_shape(space: VariableSpace, plant: PlantSpec) -> PlantShape:
    return PlantShape(space, parse_column(plant.F, space), parse_matrix(plant.G, space))


def build_plant(shape: PlantShape, plant: PlantSpec) -> Optional[PlantModel]:
    if not plant.has_model:
        return None
    return PlantModel(shape, plant.A1, plant.A2, plant.B2)


@dataclass(frozen=True, eq=False)
class Problem:
    spec: ProblemSpec
    shape: PlantShape
    structure: StructureChoice
    epsilons: EpsilonConfig
    degrees: DegreeChoice
    grid: VerificationGrid
    plant: Optional[PlantModel] = None
    true_plant: Optional[PlantModel] = None
    dataset: Optional[Dataset] = None
    prior: Optional[PriorKnowledge] = None
    experiment: Optional[ExperimentConfig] = None

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def space(self) -> VariableSpace:
        return self.shape.space

    @property
    def closed_loop_plant(self) -> Optional[PlantModel]:
        """The system closed-loop runs use: the true system when given, else the model."""
        return self.true_plant if self.true_plant is not None else self.plant

    def with_dataset(self, dataset: Dataset) -> 'Problem':
        return replace(self, dataset=dataset)

    def with_degrees(self, degrees: DegreeChoice) -> 'Problem':
        return replace(self, degrees=degrees)

    def noise(self) -> NoiseBound:
        """Energy bound from the ``data.noise`` section.

        Raises:
            QmiError: the problem has no data section or no dataset.
        """
        if self.spec.data is None:
            raise QmiError(f'problem {self.name!r} has no data section')
        bound = self.spec.data.noise
        if bound.phi11 is not None:
            return NoiseBound(bound.phi11)
        if self.dataset is None:
            raise QmiError('a noise radius needs a dataset to fix the number of samples')
        if bound.convention == 'sample':
            return NoiseBound.from_sample_bound(bound.omega, self.dataset.T)
        return NoiseBound.from_radius(bound.omega, self.dataset.T)

    def data_matrices(self) -> DataMatrices:
        if self.dataset is None:
            raise QmiError(f'problem {self.name!r} has no dataset')
        return build_data_matrices(self.shape, self.dataset)

    def compatible_set(self) -> Optional[QmiSet]:
        """The set of systems the data admit, restricted by the known entries when given.

        Returns ``None`` when every entry is known.
        """
        data, noise = self.data_matrices(), self.noise()
        if self.prior is not None and self.prior.alpha:
            return build_prior_qmi(data, noise, self.prior)
        return build_qmi(data, noise)

    def initial_states(self, rng: np.random.Generator) -> List[np.ndarray]:
        simulation = self.spec.simulation
        states = [np.asarray(x, dtype=float) for x in simulation.initial_states]
        if simulation.random_states:
            states.extend(random_states(rng, simulation.random_states, self.shape.n, simulation.random_box))
        return states

    def reference_certificate(self) -> Optional[Certificate]:
        """The recorded ``P`` and ``L`` of the example, when the file carries them."""
        reference = self.spec.reference
        if reference is None:
            return None
        space = self.space
        return Certificate('reference', parse_matrix(reference.P, space), parse_matrix(reference.L, space))


def build_problem(spec: ProblemSpec) -> Problem:
    space = build_space(spec.variables)
    shape = build_shape(space, spec.plant)
    structure = StructureChoice(parse_column(spec.structure.Z, space), parse_matrix(spec.structure.H, space))
    eps = spec.epsilons
    epsilons = EpsilonConfig(eps.eps1, parse_polynomial(eps.eps2, space), parse_polynomial(eps.eps3, space),
                             eps.c, eps.r)
    deg = spec.degrees
    degrees = DegreeChoice(deg.P, deg.L, tuple(deg.P_variables) if deg.P_variables is not None else None,
                           deg.P_even)
    grid = VerificationGrid(spec.grid.lower, spec.grid.upper, spec.grid.points)
    plant = build_plant(shape, spec.plant)
    true_plant = None
    if spec.true_system is not None:
        true_plant = PlantModel(shape, spec.true_system.A1, spec.true_system.A2, spec.true_system.B2)

    dataset = None
    if spec.data is not None and spec.data.samples is not None:
        s = spec.data.samples
        dataset = Dataset(np.asarray(s.t), np.asarray(s.X), np.asarray(s.Xdot), np.asarray(s.U))
    prior = None
    if spec.prior:
        prior = PriorKnowledge.from_entries(shape, [(e.matrix, e.row, e.col, e.value) for e in spec.prior])
    experiment = ExperimentConfig.from_spec(spec.experiment) if spec.experiment is not None else None
    return Problem(spec, shape, structure, epsilons, degrees, grid, plant, true_plant, dataset, prior, experiment)


def load_problem(path: Path) -> Problem:
    """Read and validate a JSON or YAML problem file.

    Raises:
        pydantic.ValidationError: schema violations, with field locations.
        PolynomialSyntaxError: an expression fails to parse (character position).
        yaml.YAMLError: the file is not well-formed.
    """
    problem = build_problem(ProblemSpec.model_validate(read_structured(path)))
    logger.info(f"Loaded problem {problem.name!r}: n={problem.shape.n}, f={problem.shape.f}, "
                f"g={problem.shape.g}, p={problem.structure.p}")
    return problem


def load_experiment(path: Path):
    """Read an experiment file; returns ``(plant, ExperimentConfig, name)``."""
    file = ExperimentFile.model_validate(read_structured(path))
    space = build_space(file.variables)
    shape = build_shape(space, file.plant)
    return build_plant(shape, file.plant), ExperimentConfig.from_spec(file.experiment), file.name
