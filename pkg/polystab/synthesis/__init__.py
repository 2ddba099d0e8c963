from polystab.synthesis.data import (
    assemble_prior,
    assemble_theorem2,
    build_R,
    check_compatible_systems,
    data_block_matrix,
    synthesize_data,
)
from polystab.synthesis.lyapunov import ControllerLyapunov
from polystab.synthesis.model import (
    Certificate,
    EpsilonReport,
    StructureReport,
    assemble_previous_work,
    assemble_theorem1,
    build_M,
    certify_epsilons,
    derive_decay_constants,
    extract_controller_lyapunov,
    synthesize_model,
    validate_structure,
    verify_certificate,
)
from polystab.synthesis.plant import (
    DegreeChoice,
    EpsilonConfig,
    PlantModel,
    PlantShape,
    StructureChoice,
    VerificationGrid,
    stack_parameters,
)
from polystab.synthesis.qmi import (
    DataMatrices,
    Dataset,
    Membership,
    NoiseBound,
    PriorKnowledge,
    QmiSet,
    build_data_matrices,
    build_prior_qmi,
    build_qmi,
    index_to_entry,
    map_entry_to_index,
    membership_check,
    sample_compatible,
    slemma_check,
)


__all__ = [
    # Plant and tuning
    "DegreeChoice",
    "EpsilonConfig",
    "PlantModel",
    "PlantShape",
    "StructureChoice",
    "VerificationGrid",
    "stack_parameters",

    # Model-based
    "Certificate",
    "ControllerLyapunov",
    "EpsilonReport",
    "StructureReport",
    "assemble_previous_work",
    "assemble_theorem1",
    "build_M",
    "certify_epsilons",
    "derive_decay_constants",
    "extract_controller_lyapunov",
    "synthesize_model",
    "validate_structure",
    "verify_certificate",

    # Data-based
    "DataMatrices",
    "Dataset",
    "Membership",
    "NoiseBound",
    "PriorKnowledge",
    "QmiSet",
    "assemble_prior",
    "assemble_theorem2",
    "build_R",
    "build_data_matrices",
    "build_prior_qmi",
    "build_qmi",
    "check_compatible_systems",
    "data_block_matrix",
    "index_to_entry",
    "map_entry_to_index",
    "membership_check",
    "sample_compatible",
    "slemma_check",
    "synthesize_data",
]
