from pathlib import Path

import numpy as np
import pytest

from polystab.models.types import SolveStatus
from polystab.sdp import ConicProgram, export_sdpa, feasibility_margin, read_sdpa, solve, write_sdpa
from polystab.utils.exceptions import DimensionMismatchError, SdpaFormatError

DATA_DIR = Path(__file__).parent / 'data'


def trivial_program() -> ConicProgram:
    """min t  s.t.  X11 + X22 = 1,  X12 - t = 0,  X PSD  (optimum t = -1/2)."""
    program = ConicProgram()
    block = program.add_block('X', 2)
    t = program.free_var(program.add_free(1))
    program.add_row({program.entry_var(block, 0, 0): 1.0, program.entry_var(block, 1, 1): 1.0}, 1.0)
    program.add_row({program.entry_var(block, 0, 1): 1.0, t: -1.0}, 0.0)
    program.objective = {t: 1.0}
    return program


def test_export_matches_golden_file():
    expected = (DATA_DIR / 'trivial.dat-s').read_text(encoding='utf-8')
    assert export_sdpa(trivial_program()) == expected


def test_write_sdpa(tmp_path):
    path = write_sdpa(trivial_program(), tmp_path / 'trivial.dat-s')
    assert path.read_text(encoding='utf-8') == export_sdpa(trivial_program())


def test_read_back_export():
    original = trivial_program()
    restored = read_sdpa(export_sdpa(original))
    assert restored.n_free == 1
    assert [b.size for b in restored.blocks] == [2]
    assert restored.objective == original.objective
    np.testing.assert_array_equal(restored.rhs, original.rhs)
    np.testing.assert_array_equal(restored.equality_matrix().toarray(), original.equality_matrix().toarray())


def test_read_rejects_malformed_entry():
    text = '1\n1\n2\n1\n1 1 1 1\n'
    with pytest.raises(SdpaFormatError) as info:
        read_sdpa(text)
    assert info.value.line == 5


def test_read_rejects_out_of_range_block():
    with pytest.raises(SdpaFormatError):
        read_sdpa('1\n1\n2\n1\n1 2 1 1 1.0\n')


def test_validate_catches_bad_indices():
    program = trivial_program()
    program.objective = {17: 1.0}
    with pytest.raises(DimensionMismatchError):
        program.validate()


def test_pack_unpack_inverse():
    program = trivial_program()
    X = np.array([[2.0, -1.0], [-1.0, 3.0]])
    v = program.pack([X], np.array([0.25]))
    blocks, free = program.unpack(v)
    np.testing.assert_array_equal(blocks[0], X)
    np.testing.assert_array_equal(free, [0.25])


@pytest.mark.solver
def test_solve_trivial_program():
    program = trivial_program()
    solution = solve(program)
    assert solution.status in (SolveStatus.OPTIMAL, SolveStatus.INACCURATE)
    assert solution.objective_value == pytest.approx(-0.5, abs=1e-6)
    np.testing.assert_allclose(solution.free, [-0.5], atol=1e-6)
    np.testing.assert_allclose(solution.blocks[0], [[0.5, -0.5], [-0.5, 0.5]], atol=1e-5)
    margin = feasibility_margin(solution, program)
    assert margin.max_residual < 1e-6
    assert margin.min_eigenvalue > -1e-6


@pytest.mark.solver
def test_solve_reports_infeasibility_without_raising():
    program = ConicProgram()
    block = program.add_block('X', 1)
    program.add_row({program.entry_var(block, 0, 0): 1.0}, -1.0)
    solution = solve(program)
    assert solution.status is SolveStatus.INFEASIBLE
    assert not solution.has_values
    assert solution.blocks is None
