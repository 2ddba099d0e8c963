"""Certificate JSON files: the solved ``P`` and ``L`` as expression strings plus diagnostics."""
import json
import logging
from pathlib import Path

from polystab.config.schemas import CertificateFile, VariablesSpec
from polystab.models.types import SolveStatus
from polystab.poly import parse_matrix
from polystab.poly.space import VariableSpace
from polystab.repositories.utils import jsonable, read_structured
from polystab.synthesis.model import Certificate
from polystab.utils.exceptions import SpaceMismatchError

logger = logging.getLogger(__name__)


def to_file_model(problem: str, certificate: Certificate) -> CertificateFile:
    space = certificate.P.space
    return CertificateFile(
        problem=problem,
        method=certificate.method,
        variables=VariablesSpec(x1=list(space.x1), x2=list(space.x2)),
        P=certificate.P.to_text(),
        L=certificate.L.to_text(),
        status=str(certificate.status),
        diagnostics=jsonable(certificate.diagnostics),
    )


def write_certificate(path: Path, problem: str, certificate: Certificate) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = to_file_model(problem, certificate).model_dump()
    path.write_text(json.dumps(data, indent=2, sort_keys=False) + '\n', encoding='utf-8')
    logger.debug(f"Wrote {certificate.method} certificate to {path}")
    return path


def read_certificate(path: Path, space: VariableSpace) -> Certificate:
    """Load a certificate and rebuild ``P`` and ``L`` over ``space``.

    Raises:
        pydantic.ValidationError: the file does not match the schema.
        SpaceMismatchError: the file's variables differ from ``space``.
    """
    file = CertificateFile.model_validate(read_structured(path))
    if tuple(file.variables.x1) != space.x1 or tuple(file.variables.x2) != space.x2:
        raise SpaceMismatchError(
            f'certificate variables {file.variables.x1 + file.variables.x2} do not match problem variables {list(space.names)}'
        )
    status = SolveStatus[file.status] if file.status in SolveStatus.__members__ else SolveStatus.FEASIBLE
    return Certificate(file.method, parse_matrix(file.P, space), parse_matrix(file.L, space), status,
                       diagnostics=dict(file.diagnostics, problem=file.problem))
