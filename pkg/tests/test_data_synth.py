import numpy as np
import pytest

from polystab.dynamics.experiment import ball_noise
from polystab.models.types import ParameterMatrix
from polystab.poly import Polynomial, PolynomialMatrix, parse_matrix
from polystab.repositories.examples import load_example
from polystab.sos import monomials_up_to
from polystab.synthesis.data import (
    assemble_prior,
    build_R,
    check_compatible_systems,
    data_block_matrix,
    parameter_labels,
    synthesize_data,
)
from polystab.synthesis.model import build_M
from polystab.synthesis.plant import PlantModel
from polystab.synthesis.qmi import (
    Dataset,
    NoiseBound,
    PriorKnowledge,
    build_data_matrices,
    build_prior_qmi,
    build_qmi,
    index_to_entry,
    map_entry_to_index,
    membership_check,
    sample_compatible,
    slemma_check,
)
from polystab.utils.exceptions import DataRankError, QmiError


@pytest.fixture(scope='module')
def ex2():
    return load_example('ex2')


@pytest.fixture(scope='module')
def ex4():
    return load_example('ex4')


def noisy_dataset(plant: PlantModel, T: int, omega: float, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    shape = plant.shape
    X = rng.uniform(-2, 2, size=(T, shape.n))
    U = rng.uniform(-2, 2, size=(T, shape.m))
    Xdot = plant.field(X, U) + ball_noise(rng, T, shape.n, omega)
    return Dataset(np.arange(T) * 0.1, X.T, Xdot.T, U.T)


def random_entry(space, rng: np.random.Generator, degree: int = 2) -> Polynomial:
    monomials = monomials_up_to(space.dim, tuple(range(space.dim)), degree)
    return Polynomial(space, {m: rng.uniform(-1, 1) for m in monomials})


def test_R_reproduces_yMy(ex2):
    """``R(x, y)^T v`` is ``y^T M(x) y`` for random plants ``v`` and random ``P``, ``L``."""
    space = ex2.space
    shape = ex2.shape
    rng = np.random.default_rng(4)
    for _ in range(20):
        plant = PlantModel.from_parameters(shape, rng.uniform(-2, 2, size=shape.ell))
        p12 = random_entry(space, rng)
        P = PolynomialMatrix.from_rows(space, [[random_entry(space, rng), p12], [p12, random_entry(space, rng)]])
        L = PolynomialMatrix.from_rows(space, [[random_entry(space, rng), random_entry(space, rng)]])
        R = build_R(shape, ex2.structure, P, L)
        M = build_M(plant, ex2.structure, P, L)
        assert R.rows == shape.ell

        xy = rng.uniform(-2, 2, size=(5, 4))
        x, y = xy[:, :2], xy[:, 2:]
        via_R = R.evaluate_many(xy)[:, :, 0] @ plant.parameters
        via_M = np.einsum('ni,nij,nj->n', y, M.evaluate_many(x), y)
        np.testing.assert_allclose(via_R, via_M, rtol=1e-10, atol=1e-10)


def test_index_map(ex4):
    shape = ex4.shape
    assert shape.ell == 17
    assert map_entry_to_index('A1', 1, 1, shape) == 1
    assert map_entry_to_index(ParameterMatrix.A1, 3, 4, shape) == 12
    assert map_entry_to_index('A2', 1, 1, shape) == 13
    assert map_entry_to_index('B2', 1, 1, shape) == 17
    for k in range(1, shape.ell + 1):
        which, row, col = index_to_entry(k, shape)
        assert map_entry_to_index(which, row, col, shape) == k
    with pytest.raises(IndexError):
        map_entry_to_index('A1', 4, 1, shape)
    assert parameter_labels(shape, [9, 17]) == ['A1(3,1)', 'B2(1,1)']


def test_prior_of_ex4(ex4):
    assert ex4.prior.alpha_hat == (9, 10, 12, 13, 15, 16, 17)
    assert ex4.prior.gamma == 7
    assert ex4.compatible_set().ell == 7


def test_recorded_data_facts(ex2, ex4):
    data = ex2.data_matrices()
    assert data.T == 4
    np.testing.assert_allclose(data.F[:, 0], [-0.4769, 2.1206, 0.2275], atol=1e-4)
    assert ex2.noise().phi11 == pytest.approx(4e-4)
    assert ex4.noise().phi11 == pytest.approx(5e-4)


def test_noiseless_data_pin_down_the_system(ex2):
    plant = ex2.true_plant
    data = build_data_matrices(ex2.shape, noisy_dataset(plant, 12, 0.0))
    qmi = build_qmi(data, NoiseBound(0.0))
    assert qmi.schur == pytest.approx(0.0, abs=1e-9)
    np.testing.assert_allclose(qmi.center, plant.parameters, atol=1e-8)


def test_rank_deficient_data_are_rejected(ex2):
    with pytest.raises(DataRankError):
        build_data_matrices(ex2.shape, noisy_dataset(ex2.true_plant, 3, 0.01))


def test_membership(ex2):
    plant = ex2.true_plant
    for seed in range(50):
        data = build_data_matrices(ex2.shape, noisy_dataset(plant, 20, 0.1, seed=seed))
        qmi = build_qmi(data, NoiseBound.from_radius(0.1, 20))
        assert membership_check(qmi, plant.A1, plant.A2, plant.B2).in_sigma, seed

    far = membership_check(qmi, plant.A1 + 1.0, plant.A2, plant.B2)
    assert not far.in_sigma
    assert far.slack < 0

    draws = sample_compatible(qmi, 200, np.random.default_rng(5))
    slack = qmi.schur + np.einsum('ni,ij,nj->n', draws - qmi.center, qmi.N22, draws - qmi.center)
    assert slack.min() >= -1e-9


def test_slemma_is_exact(ex2):
    plant = ex2.true_plant
    data = build_data_matrices(ex2.shape, noisy_dataset(plant, 20, 0.1, seed=2))
    qmi = build_qmi(data, NoiseBound.from_radius(0.1, 20))
    rng = np.random.default_rng(6)
    lam = rng.standard_normal(qmi.ell)
    spread = np.sqrt(qmi.schur * lam @ qmi.neg_inv @ lam)
    lowest = lam @ qmi.center - spread

    a = -lowest + 1e-6
    assert slemma_check(qmi, lam, a).certified
    assert not slemma_check(qmi, lam, -lowest - 0.1 * spread).certified
    draws = sample_compatible(qmi, 10_000, rng)
    assert np.min(draws @ lam + a) >= -1e-6


def test_empty_prior_matches_plain_set(ex2):
    plant = ex2.true_plant
    data = build_data_matrices(ex2.shape, noisy_dataset(plant, 10, 0.05))
    noise = NoiseBound.from_radius(0.05, 10)
    plain = build_qmi(data, noise)
    empty = build_prior_qmi(data, noise, PriorKnowledge(ex2.shape.ell))
    np.testing.assert_allclose(empty.N, plain.N)
    np.testing.assert_allclose(empty.center, plain.center)


def test_prior_restricts_the_center(ex2):
    plant = ex2.true_plant
    shape = ex2.shape
    data = build_data_matrices(shape, noisy_dataset(plant, 10, 0.05))
    prior = PriorKnowledge.from_entries(shape, [('A1', 1, 1, 0.0), ('B2', 1, 1, 1.0)])
    qmi = build_prior_qmi(data, NoiseBound.from_radius(0.05, 10), prior)
    assert qmi.ell == shape.ell - 2
    full = prior.combine(qmi.center)
    assert full[0] == 0.0
    assert full[-1] == 1.0


def test_all_known_system_violating_the_bound(ex2):
    shape = ex2.shape
    plant = ex2.true_plant
    data = build_data_matrices(shape, noisy_dataset(plant, 10, 0.05))
    wrong = plant.parameters + 1.0
    prior = PriorKnowledge(shape.ell, tuple(range(1, shape.ell + 1)), wrong)
    assert build_prior_qmi(data, NoiseBound.from_radius(0.05, 10), prior) is None
    cfg = ex2.epsilons.with_decay(0.004, 1.0)
    with pytest.raises(QmiError):
        assemble_prior(shape, ex2.structure, cfg, data, NoiseBound.from_radius(0.05, 10), prior, ex2.degrees)


def test_block_matrix_layout(ex2):
    space = ex2.space
    P = parse_matrix([['2', '0'], ['0', '2']], space)
    L = parse_matrix([['-x1', '-x2']], space)
    qmi = ex2.compatible_set()
    block = data_block_matrix(ex2.shape, ex2.structure, ex2.epsilons, P, L, qmi)
    assert block.shape == (1 + ex2.shape.ell + 2, 1 + ex2.shape.ell + 2)
    assert block.is_symmetric()
    assert block.space.y == ('y_1', 'y_2')


@pytest.mark.solver
@pytest.mark.slow
def test_synthesis_for_ex2_holds_over_compatible_systems(ex2):
    certificate = synthesize_data(ex2.shape, ex2.structure, ex2.epsilons, ex2.data_matrices(), ex2.noise(),
                                  ex2.degrees)
    assert certificate.method == 'data'
    assert certificate.P.space == ex2.space
    result = check_compatible_systems(ex2.shape, ex2.structure, ex2.epsilons, certificate, ex2.compatible_set(),
                                      np.random.default_rng(0), systems=200, points=100)
    assert result.passed, str(result)
