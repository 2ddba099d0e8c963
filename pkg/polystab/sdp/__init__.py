from polystab.sdp.program import (
    ConicProgram,
    ConicSolution,
    MarginReport,
    PsdBlock,
    feasibility_margin,
)
from polystab.sdp.sdpa import export_sdpa, read_sdpa, write_sdpa
from polystab.sdp.solver import solve


__all__ = (
    'ConicProgram',
    'ConicSolution',
    'MarginReport',
    'PsdBlock',
    'export_sdpa',
    'feasibility_margin',
    'read_sdpa',
    'solve',
    'write_sdpa',
)
