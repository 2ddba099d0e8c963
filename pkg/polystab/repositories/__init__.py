from . import (
    certificates,
    datasets,
    examples,
    problems,
    utils,
)

__all__ = (
    'certificates',
    'datasets',
    'examples',
    'problems',
    'utils',
)
