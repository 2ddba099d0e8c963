"""Export the compiled semidefinite program in SDPA sparse format."""
from pathlib import Path
from typing import Optional

import click

from polystab.config import get_runtime_settings, get_solver_settings
from polystab.sdp.sdpa import write_sdpa
from polystab.sos.compiler import compile

from scripts import config_constants, config_utils


@click.command('export-sdp', help='Compile a problem and write it as an SDPA file')
@click.argument('problem_file', type=click.Path(dir_okay=False, path_type=Path))
@click.option('-o', '--output', type=click.Path(dir_okay=False, path_type=Path), default=None,
              help=f'SDPA file to write (default: runs/<problem name>/{config_constants.PROGRAM_NAME}).')
@click.option('--method', type=click.Choice(config_utils.METHODS), default=None,
              help='Which conditions to compile (default: model when the problem has one, else data).')
@config_utils.guarded
def export_sdp(problem_file: Path, output: Optional[Path], method: Optional[str]):
    problem = config_utils.load_problem_file(problem_file)
    if method is None:
        method = 'model' if problem.plant is not None else 'data'
    settings = get_solver_settings()
    if output is None:
        output = config_utils.output_dir(None, problem.name) / config_constants.PROGRAM_NAME

    arguments = {'method': method, 'output': str(output)}
    with config_utils.ArtifactWriter('export-sdp', output.parent, [problem_file], get_runtime_settings().seed,
                                     arguments) as writer:
        conic = compile(config_utils.assemble_program(problem, method, settings), settings.margin_cap)
        writer.record(write_sdpa(conic, output))
        writer.write_json(f'{output.stem}.blocks.json', {
            'label': conic.metadata['label'],
            'free_variables': conic.n_free,
            'decision_coefficients': conic.metadata['n_decisions'],
            'margin_variable': conic.metadata['margin_var'],
            'blocks': [{'label': c['label'], 'block': c['block'], 'basis': c['basis'].to_text()}
                       for c in conic.metadata['constraints']],
        })
        config_utils.print_status('INFO', f'Wrote {conic.n_rows} equalities over {len(conic.blocks)} blocks '
                                          f'to {output}')

    return writer.exit_code
