"""Dataset CSV files: header ``t,x_1..x_n,xdot_1..xdot_n,u_1..u_m``, one row per sample."""
import logging
from pathlib import Path

import numpy as np

from polystab.synthesis.qmi import Dataset
from polystab.utils.exceptions import DatasetFormatError

logger = logging.getLogger(__name__)


def dataset_header(n: int, m: int) -> str:
    names = ['t'] + [f'x_{i + 1}' for i in range(n)] + [f'xdot_{i + 1}' for i in range(n)]
    return ','.join(names + [f'u_{j + 1}' for j in range(m)])


def write_dataset(dataset: Dataset, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.column_stack([dataset.t, dataset.X.T, dataset.Xdot.T, dataset.U.T])
    np.savetxt(path, table, delimiter=',', header=dataset_header(dataset.n, dataset.m), comments='', fmt='%.17g')
    logger.debug(f"Wrote {dataset.T} samples to {path}")
    return path


def read_dataset(path: Path) -> Dataset:
    """Read a dataset CSV; the header fixes ``n`` and ``m``.

    Raises:
        DatasetFormatError: missing or malformed header, non-numeric cells or
            a wrong number of columns.
    """
    path = Path(path)
    with path.open(encoding='utf-8') as f:
        header = f.readline().strip().split(',')
    if not header or header[0] != 't':
        raise DatasetFormatError("header must start with 't'", str(path))
    n = sum(name.startswith('x_') for name in header)
    m = sum(name.startswith('u_') for name in header)
    if header != dataset_header(n, m).split(','):
        raise DatasetFormatError(f'unexpected header {",".join(header)}; expected {dataset_header(n, m)}', str(path))
    try:
        table = np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
    except ValueError as e:
        raise DatasetFormatError(str(e), str(path)) from e
    if table.shape[1] != len(header):
        raise DatasetFormatError(f'{table.shape[1]} columns, header names {len(header)}', str(path))
    t = table[:, 0]
    X = table[:, 1:1 + n].T
    Xdot = table[:, 1 + n:1 + 2 * n].T
    U = table[:, 1 + 2 * n:].T
    return Dataset(t, X, Xdot, U)
