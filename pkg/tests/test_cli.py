import hashlib
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from control import cli
from polystab.models.types import ExitCode
from polystab.repositories.certificates import write_certificate
from polystab.repositories.examples import example_path, load_example
from polystab.utils import executor

DATA_DIR = Path(__file__).parent / 'data'


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def reference_file(tmp_path):
    problem = load_example('ex1')
    return write_certificate(tmp_path / 'certificate.json', problem.name, problem.reference_certificate())


def manifest_matches(directory) -> dict:
    manifest = json.loads((directory / 'manifest.json').read_text())
    for artifact in manifest['artifacts']:
        data = (directory / artifact['path']).read_bytes()
        assert hashlib.sha256(data).hexdigest() == artifact['sha256']
        assert len(data) == artifact['size']
    return manifest


def test_verify_reference_certificate(runner, reference_file, tmp_path):
    result = runner.invoke(cli, ['verify', str(reference_file), str(example_path('ex1'))])
    assert result.exit_code == ExitCode.OK, result.output
    report = json.loads((tmp_path / 'report.json').read_text())
    assert report['grid']['passed']
    manifest = manifest_matches(tmp_path)
    assert manifest['command'] == 'verify'
    assert manifest['exit_code'] == 0
    assert [a['path'] for a in manifest['artifacts']] == ['report.json']
    assert len(manifest['inputs']) == 2


def test_truncated_certificate_is_an_error(runner, reference_file):
    text = reference_file.read_text()
    reference_file.write_text(text[:len(text) // 2])
    result = runner.invoke(cli, ['verify', str(reference_file), str(example_path('ex1'))])
    assert result.exit_code == ExitCode.ERROR


def test_certificate_for_other_variables_is_an_error(runner, reference_file):
    result = runner.invoke(cli, ['verify', str(reference_file), str(example_path('ex4'))])
    assert result.exit_code == ExitCode.ERROR


def test_missing_problem_file(runner, reference_file, tmp_path):
    result = runner.invoke(cli, ['verify', str(reference_file), str(tmp_path / 'missing.yml')])
    assert result.exit_code == ExitCode.ERROR


def test_simulate_reference(runner, reference_file, tmp_path):
    result = runner.invoke(cli, ['simulate', str(reference_file), str(example_path('ex1')),
                                 '--x0', '4,4', '--x0', '-1,0.5'])
    assert result.exit_code == ExitCode.OK, result.output
    summary = json.loads((tmp_path / 'simulation.json').read_text())
    assert summary['converged'] == 2
    assert (tmp_path / 'trajectory_0.csv').read_text().startswith('t,x_1,x_2,V,Vdot')
    manifest_matches(tmp_path)


def test_simulate_rejects_wrong_dimension(runner, reference_file):
    result = runner.invoke(cli, ['simulate', str(reference_file), str(example_path('ex1')), '--x0', '1,2,3'])
    assert result.exit_code == ExitCode.ERROR


def test_gen_data(runner, tmp_path):
    out = tmp_path / 'gen'
    result = runner.invoke(cli, ['gen-data', str(DATA_DIR / 'ex2_experiment.yml'), '-o', str(out), '--seed', '3'])
    assert result.exit_code == ExitCode.OK, result.output
    assert (out / 'data.csv').exists()
    experiment = json.loads((out / 'experiment.json').read_text())
    assert experiment['T'] == 4
    assert experiment['realized_energy'] <= experiment['energy_bound']
    assert manifest_matches(out)['seed'] == 3


@pytest.mark.solver
def test_export_sdp(runner, tmp_path):
    target = tmp_path / 'ex1.dat-s'
    result = runner.invoke(cli, ['export-sdp', str(example_path('ex1')), '-o', str(target)])
    assert result.exit_code == ExitCode.OK, result.output
    assert target.read_text().startswith('"polystab SDP')
    blocks = json.loads((tmp_path / 'ex1.blocks.json').read_text())
    assert [b['label'] for b in blocks['blocks']] == ['P_positive', 'decay']
    manifest = manifest_matches(tmp_path)
    assert {a['path'] for a in manifest['artifacts']} == {'ex1.dat-s', 'ex1.blocks.json'}


@pytest.mark.solver
def test_repro_ex1_reference(runner, tmp_path):
    result = runner.invoke(cli, ['repro', 'ex1', '--reference-only', '-o', str(tmp_path)])
    assert result.exit_code == ExitCode.OK, result.output
    summary = json.loads((tmp_path / 'summary.json').read_text())
    assert summary['reference']['displays']['passed']
    assert summary['reference']['sos']['passed']
    assert summary['closed_loop']['converged'] == 8
    assert (tmp_path / 'portrait_levels.csv').exists()
    manifest_matches(tmp_path)


@pytest.mark.solver
@pytest.mark.slow
def test_repro_ex3_constant_P_is_infeasible(runner, tmp_path):
    result = runner.invoke(cli, ['repro', 'ex3', '--constant-P', '-o', str(tmp_path)])
    assert result.exit_code == ExitCode.INFEASIBLE, result.output
    summary = json.loads((tmp_path / 'summary.json').read_text())
    assert summary['synthesis']['status'] == 'infeasible'
    assert manifest_matches(tmp_path)['status'] == 'infeasible'


TIMING_KEYS = {'wall_time', 'solve_time'}


def without_timing(value):
    if isinstance(value, dict):
        return {k: without_timing(v) for k, v in value.items() if k not in TIMING_KEYS}
    if isinstance(value, list):
        return [without_timing(v) for v in value]
    return value


@pytest.mark.solver
@pytest.mark.slow
def test_repro_is_deterministic_for_a_seed(runner, tmp_path):
    outputs = []
    for run in ('first', 'second'):
        directory = tmp_path / run
        result = runner.invoke(cli, ['repro', 'ex1', '--reference-only', '--seed', '7', '-o', str(directory)])
        assert result.exit_code == ExitCode.OK, result.output
        outputs.append(json.loads((directory / 'summary.json').read_text()))
    assert without_timing(outputs[0]) == without_timing(outputs[1])
    assert outputs[0]['seed'] == 7


@pytest.mark.solver
@pytest.mark.slow
def test_repro_ex4_reference_converges(runner, tmp_path):
    result = runner.invoke(cli, ['repro', 'ex4', '--reference-only', '-o', str(tmp_path)])
    assert result.exit_code != ExitCode.ERROR, result.output
    closed_loop = json.loads((tmp_path / 'summary.json').read_text())['closed_loop']
    assert len(closed_loop['runs']) == 4
    assert closed_loop['converged'] == 4
    assert (tmp_path / 'traces.csv').exists()
    manifest_matches(tmp_path)


def test_worker_pool_is_released_after_a_command(runner, reference_file):
    result = runner.invoke(cli, ['simulate', str(reference_file), str(example_path('ex1')),
                                 '--x0', '4,4', '--x0', '-1,0.5'])
    assert result.exit_code == ExitCode.OK, result.output
    assert executor._executor is None
