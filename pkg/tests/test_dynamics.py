from dataclasses import replace

import numpy as np
import pytest

from polystab.dynamics import (
    IntegratorConfig,
    ball_noise,
    integrate,
    level_sets,
    run_experiment,
    simulate_batch,
    simulate_closed_loop,
    verify_lyapunov_along,
)
from polystab.dynamics.plots import PhasePortrait, trace_table, write_portrait
from polystab.repositories.examples import BoundedLyapunovSystem, load_example
from polystab.synthesis.model import extract_controller_lyapunov
from polystab.utils.exceptions import DimensionMismatchError, IntegrationError


@pytest.fixture(scope='module')
def ex1_loop():
    problem = load_example('ex1')
    return problem, extract_controller_lyapunov(problem.reference_certificate(), problem.structure)


def test_linear_decay():
    x0 = np.array([1.0, -2.0])
    trajectory = integrate(lambda t, x: -x, x0, 5.0)
    np.testing.assert_allclose(trajectory.final, x0 * np.exp(-5.0), rtol=1e-6)
    times = np.linspace(0, 5, 11)
    np.testing.assert_allclose(trajectory.at(times), np.exp(-times)[:, None] * x0, rtol=1e-5, atol=1e-9)


def test_halving_the_step_bound_cuts_the_error():
    """With a loose tolerance the step is pinned at ``max_step``; the 5th-order pair gains far more than 4x."""
    x0 = np.array([1.0])
    errors = []
    for max_step in (0.5, 0.25):
        cfg = IntegratorConfig(rtol=1e-2, atol=1e-2, max_step=max_step)
        trajectory = integrate(lambda t, x: -x, x0, 5.0, cfg)
        errors.append(abs(trajectory.final[0] - np.exp(-5.0)))
    assert errors[1] > 0
    assert errors[0] >= 4 * errors[1]


def test_oscillator_energy_drift():
    cfg = IntegratorConfig(rtol=1e-10, atol=1e-12)
    trajectory = integrate(lambda t, x: np.array([x[1], -x[0]]), [1.0, 0.0], 100.0, cfg)
    energy = np.einsum('ni,ni->n', trajectory.states, trajectory.states)
    assert np.max(np.abs(energy - 1.0)) < 1e-6


def test_blowup_is_reported():
    with pytest.raises(IntegrationError):
        integrate(lambda t, x: x ** 2, [1.0], 2.0, IntegratorConfig(blowup=1e4))


def test_field_dimension_is_checked():
    with pytest.raises(DimensionMismatchError):
        integrate(lambda t, x: np.zeros(3), [1.0, 2.0], 1.0)


def test_bounded_lyapunov_function():
    system = BoundedLyapunovSystem
    assert system.value(np.array([[1e3, 0.0]]))[0] < 1.0

    points = np.random.default_rng(8).uniform(-3, 3, size=(100, 2))
    fields = np.array([system.field(0.0, x) for x in points])
    np.testing.assert_allclose(np.einsum('ni,ni->n', system.gradient(points), fields), system.decay(points),
                               rtol=1e-10, atol=1e-10)

    trajectory = integrate(system.field, [2.0, 1.0], 20.0)
    V = system.value(trajectory.states)
    assert np.all(np.diff(V) <= 1e-9)
    assert np.linalg.norm(trajectory.final) < 1e-3


def test_ball_noise_radius():
    noise = ball_noise(np.random.default_rng(1), 500, 3, 0.1)
    assert noise.shape == (500, 3)
    assert np.linalg.norm(noise, axis=1).max() <= 0.1


def test_experiment_is_reproducible():
    problem = load_example('ex2')
    first = run_experiment(problem.true_plant, problem.experiment)
    second = run_experiment(problem.true_plant, problem.experiment)
    np.testing.assert_array_equal(first.dataset.Xdot, second.dataset.Xdot)
    assert first.dataset.T == 4
    assert first.bound == pytest.approx(4e-4)
    assert first.energy <= first.bound

    other = run_experiment(problem.true_plant, replace(problem.experiment, seed=1))
    assert not np.array_equal(other.noise, first.noise)
    np.testing.assert_allclose(other.dataset.X, first.dataset.X)


def test_experiment_checks_dimensions():
    problem = load_example('ex2')
    with pytest.raises(DimensionMismatchError):
        run_experiment(problem.true_plant, replace(problem.experiment, x0=(1.0, 2.0, 3.0)))


def test_ex1_closed_loop_converges(ex1_loop):
    problem, controller = ex1_loop
    trajectory = simulate_closed_loop(problem.plant, controller, [4.0, 4.0], 50.0)
    assert np.linalg.norm(trajectory.final) < 1e-3
    assert trajectory.V is not None
    report = verify_lyapunov_along(trajectory, controller, problem.epsilons, problem.structure)
    assert report.passed, [str(c) for c in report.failed]


def test_batch_keeps_order(ex1_loop):
    problem, controller = ex1_loop
    starts = [[1.0, 0.0], [0.0, -1.0], [-1.0, 1.0]]
    runs = simulate_batch(problem.plant, controller, starts, 5.0)
    assert [list(r.states[0]) for r in runs] == starts
    table, header = trace_table(runs)
    assert header == 'run,t,x_1,x_2'
    assert set(table[:, 0]) == {0.0, 1.0, 2.0}


def test_level_sets_of_a_circle(tmp_path):
    lines = level_sets(lambda p: np.einsum('ni,ni->n', p, p), 2.0, levels=[1.0])
    assert lines
    for level, line in lines:
        assert level == 1.0
        np.testing.assert_allclose(np.linalg.norm(line, axis=1), 1.0, atol=1e-3)

    portrait = PhasePortrait(2.0, np.zeros((4, 4)), [], lines)
    paths = write_portrait(portrait, tmp_path, 'portrait')
    assert [p.name for p in paths] == ['portrait_arrows.csv', 'portrait_trajectories.csv', 'portrait_levels.csv']
    assert paths[2].read_text().startswith('level,line,x_1,x_2')


def test_random_initial_states_follow_the_seed():
    problem = load_example('ex4')
    first = problem.initial_states(np.random.default_rng(3))
    second = problem.initial_states(np.random.default_rng(3))
    assert len(first) == 4
    np.testing.assert_array_equal(np.array(first), np.array(second))
    assert np.array(first).shape == (4, problem.shape.n)
    assert np.abs(np.array(first)).max() <= 2.0
