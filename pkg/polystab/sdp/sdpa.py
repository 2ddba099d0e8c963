"""SDPA sparse (``.dat-s``) export and import.

An equality-form program ``min C.X s.t. A_r.X = b_r, X PSD`` is the dual
side of SDPA's pair, so each row becomes a constraint matrix ``F_r`` with
right-hand side ``b_r`` and the objective is written as ``F_0 = -C``.
Off-diagonal coefficients are halved because SDPA matrices are symmetric.
Free variables are split as ``x = x+ - x-`` into one trailing diagonal
block of size ``2 * n_free``.
"""
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from polystab.sdp.program import ConicProgram, PsdBlock
from polystab.utils.exceptions import SdpaFormatError

Key = Tuple[int, int, int, int]


def _fmt(value: float) -> str:
    return '%.17g' % value


def _entries(program: ConicProgram) -> Dict[Key, float]:
    """SDPA 5-tuples ``(matno, blkno, i, j) -> value`` with 1-based indices."""
    locate = {}
    offsets = program.block_offsets
    for b, block in enumerate(program.blocks):
        for i in range(block.size):
            for j in range(i, block.size):
                locate[program.entry_var(b, i, j, offsets)] = (b + 1, i + 1, j + 1)
    free_block = len(program.blocks) + 1

    entries: Dict[Key, float] = {}

    def put(matno: int, var: int, value: float):
        if var in locate:
            blk, i, j = locate[var]
            scaled = value if i == j else value / 2.0
            keys = [((matno, blk, i, j), scaled)]
        else:
            k = var - program.n_block_vars
            keys = [((matno, free_block, 2 * k + 1, 2 * k + 1), value),
                    ((matno, free_block, 2 * k + 2, 2 * k + 2), -value)]
        for key, val in keys:
            entries[key] = entries.get(key, 0.0) + val

    for var, value in program.objective.items():
        put(0, var, -value)
    for row, var, value in zip(program.row_index, program.col_index, program.values):
        put(row + 1, var, value)
    return {k: v for k, v in entries.items() if v != 0.0}


def export_sdpa(program: ConicProgram) -> str:
    program.validate()
    sizes = [str(b.size) for b in program.blocks]
    if program.n_free:
        sizes.append(str(-2 * program.n_free))
    lines = [
        f'"polystab SDP: {len(program.blocks)} PSD blocks, {program.n_free} free variables',
        f'"blocks: {" ".join(b.label for b in program.blocks)}',
        str(program.n_rows),
        str(len(sizes)),
        ' '.join(sizes),
        ' '.join(_fmt(b) for b in program.rhs) if program.rhs else '',
    ]
    for (matno, blk, i, j), value in sorted(_entries(program).items()):
        lines.append(f'{matno} {blk} {i} {j} {_fmt(value)}')
    return '\n'.join(lines) + '\n'


def write_sdpa(program: ConicProgram, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(export_sdpa(program), encoding='utf-8')
    return path


def _numbers(line: str) -> List[str]:
    return line.replace(',', ' ').replace('{', ' ').replace('}', ' ').replace('(', ' ').replace(')', ' ').split()


def read_sdpa(text: str, free_block: Optional[bool] = None) -> ConicProgram:
    """Parse a ``.dat-s`` file back into an equality-form program.

    A trailing negative (diagonal) block is decoded as the free-variable
    split when ``free_block`` is true, or when it is left as ``None`` and the
    block has even size with ``+/-`` paired entries. Block labels are not
    recoverable and come back as ``block_<k>``.
    """
    header: List[Tuple[int, str]] = []
    body: List[Tuple[int, str]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('"') or line.startswith('*'):
            continue
        (header if len(header) < 4 else body).append((number, line))
    if len(header) < 3:
        raise SdpaFormatError('file ends before the block structure')
    try:
        m = int(_numbers(header[0][1])[0])
        nblocks = int(_numbers(header[1][1])[0])
        sizes = [int(s) for s in _numbers(header[2][1])[:nblocks]]
    except (ValueError, IndexError) as e:
        raise SdpaFormatError(f'bad header: {e}', header[0][0]) from None
    if len(sizes) != nblocks:
        raise SdpaFormatError(f'expected {nblocks} block sizes', header[2][0])
    if m:
        if len(header) < 4:
            raise SdpaFormatError('missing right-hand side line')
        rhs = [float(v) for v in _numbers(header[3][1])]
        if len(rhs) != m:
            raise SdpaFormatError(f'expected {m} right-hand side values, got {len(rhs)}', header[3][0])
    else:
        rhs = []
        if len(header) == 4:
            body.insert(0, header[3])

    entries: Dict[Key, float] = {}
    for number, line in body:
        parts = _numbers(line)
        if len(parts) != 5:
            raise SdpaFormatError(f'expected 5 fields, got {len(parts)}', number)
        try:
            key = (int(parts[0]), int(parts[1]), int(parts[2]), int(parts[3]))
            value = float(parts[4])
        except ValueError as e:
            raise SdpaFormatError(str(e), number) from None
        matno, blk, i, j = key
        if not 0 <= matno <= m or not 1 <= blk <= nblocks:
            raise SdpaFormatError(f'entry references matrix {matno} block {blk}', number)
        if not 1 <= i <= abs(sizes[blk - 1]) or not 1 <= j <= abs(sizes[blk - 1]):
            raise SdpaFormatError(f'entry ({i},{j}) outside block {blk}', number)
        if i > j:
            key = (matno, blk, j, i)
        entries[key] = entries.get(key, 0.0) + value

    decode_free = free_block
    if decode_free is None:
        decode_free = bool(sizes) and sizes[-1] < 0 and -sizes[-1] % 2 == 0 and all(
            entries.get((mat, blk, i + 1, i + 1), 0.0) == -v
            for (mat, blk, i, j), v in entries.items()
            if blk == nblocks and i % 2 == 1
        )

    program = ConicProgram()
    psd_sizes = sizes[:-1] if decode_free else sizes
    for k, size in enumerate(psd_sizes):
        if size < 0:
            raise SdpaFormatError(f'diagonal block {k + 1} is only supported as the free-variable block')
        program.blocks.append(PsdBlock(f'block_{k + 1}', size))
    if decode_free:
        program.n_free = -sizes[-1] // 2
    offsets = program.block_offsets

    rows: Dict[int, Dict[int, float]] = {r: {} for r in range(m + 1)}
    for (matno, blk, i, j), value in entries.items():
        if decode_free and blk == nblocks:
            if i % 2 == 0:
                continue
            var = program.free_var((i - 1) // 2)
            coef = value
        else:
            var = program.entry_var(blk - 1, i - 1, j - 1, offsets)
            coef = value if i == j else 2.0 * value
        rows[matno][var] = rows[matno].get(var, 0.0) + coef

    program.objective = {var: -coef for var, coef in sorted(rows[0].items())}
    for r in range(1, m + 1):
        program.add_row(rows[r], rhs[r - 1])
    return program
