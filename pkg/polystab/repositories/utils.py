import enum
from pathlib import Path
from typing import Any

import numpy as np
import yaml


def read_structured(path: Path) -> Any:
    """JSON or YAML file contents; JSON is read as YAML flow syntax."""
    return yaml.safe_load(Path(path).read_text(encoding='utf-8'))


def jsonable(value: Any) -> Any:
    """Plain Python containers and scalars for numpy arrays, numpy scalars and enums."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, enum.Enum):
        return str(value)
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value
