import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pra_radar.model import (
    Design,
    depolarization,
    gmm_pdf,
    gmm_score,
    pfm_rx,
    pfm_tx,
    pfv_rx,
    pfv_tx,
    precompute,
    rx_pfvs,
    steering,
    steering_derivative,
    tx_pfvs,
    wrap_phase,
)
from pra_radar.numerics import make_quadrature
from pra_radar.schemas import GaussianComponent, PriorModel

from .conftest import scene_config

phases = st.floats(-20.0, 20.0, allow_nan=False, allow_infinity=False)


def test_steering_is_unit_modulus_and_symmetric():
    config = scene_config(n_tx=12, n_rx=5)
    a = steering(config, 0.37, "tx")
    assert a.shape == (12,)
    np.testing.assert_allclose(np.abs(a), 1.0)
    # offsets N−2n+1 are antisymmetric, so a is conjugate-symmetric
    np.testing.assert_allclose(a[::-1], a.conj())
    np.testing.assert_allclose(steering(config, 0.0, "rx"), np.ones(5))


def test_steering_single_antenna_is_one():
    config = scene_config(n_tx=1, n_rx=1)
    np.testing.assert_allclose(steering(config, 1.1, "tx"), [1.0])
    np.testing.assert_allclose(steering_derivative(config, 1.1, "rx"), [0.0])


def test_steering_vectorized_over_angles():
    config = scene_config(n_tx=4, n_rx=3)
    thetas = np.array([0.1, 0.5, 2.0])
    stacked = steering(config, thetas, "rx")
    assert stacked.shape == (3, 3)
    np.testing.assert_allclose(stacked[1], steering(config, 0.5, "rx"))


def test_steering_derivative_matches_finite_difference():
    config = scene_config(n_tx=6, n_rx=6)
    h = 1e-6
    for theta in (0.3, 1.2, 2.9):
        fd = (steering(config, theta + h, "tx") - steering(config, theta - h, "tx")) / (2 * h)
        np.testing.assert_allclose(steering_derivative(config, theta, "tx"), fd, rtol=1e-7, atol=1e-8)


def test_steering_rejects_unknown_side():
    with pytest.raises(ValueError, match="side"):
        steering(scene_config(2, 2), 0.1, "up")


@given(phases)
def test_pfv_norms(phase):
    assert np.linalg.norm(pfv_tx(phase)) == pytest.approx(1.0)
    assert np.linalg.norm(pfv_rx(phase)) == pytest.approx(math.sqrt(2.0))


def test_pfv_circular_state():
    np.testing.assert_allclose(pfv_tx(math.pi / 2), np.array([1, 1j]) / math.sqrt(2), atol=1e-15)
    np.testing.assert_allclose(pfv_rx(math.pi / 2), [1, 1j], atol=1e-15)


def test_stacked_pfvs_match_single():
    xi = np.array([0.1, 2.0, 5.5])
    np.testing.assert_allclose(tx_pfvs(xi)[1], pfv_tx(2.0))
    np.testing.assert_allclose(rx_pfvs(xi)[2], pfv_rx(5.5))


def test_pfm_block_structure():
    xi = np.array([0.3, 1.7])
    f = pfm_tx(xi, n_tx=2)
    assert f.shape == (4, 2)
    np.testing.assert_allclose(f[2:, 1], pfv_tx(1.7))
    np.testing.assert_array_equal(f[2:, 0], 0)
    e = pfm_rx([0.5, 1.0, 1.5])
    assert e.shape == (6, 3)
    with pytest.raises(ValueError, match="expected 3"):
        pfm_tx(xi, n_tx=3)


def test_depolarization_matrix():
    np.testing.assert_allclose(depolarization(0.0), np.eye(2))
    psi = depolarization(0.2)
    assert psi[0, 0] == pytest.approx(1 / math.sqrt(1.2))
    assert psi[0, 1] == pytest.approx(math.sqrt(0.2) / math.sqrt(1.2))
    with pytest.raises(ValueError, match="xpd_inv"):
        depolarization(-0.1)


def test_gmm_score_matches_log_density_slope(reference_experiment):
    prior = reference_experiment.prior
    h = 1e-6
    for theta in (0.25, 1.0, 1.3, 2.7):
        fd = (math.log(gmm_pdf(prior, theta + h)) - math.log(gmm_pdf(prior, theta - h))) / (2 * h)
        assert float(gmm_score(prior, theta)) == pytest.approx(fd, rel=1e-6)


def test_gmm_score_zero_where_density_underflows(reference_experiment):
    assert float(gmm_score(reference_experiment.prior, 60.0)) == 0.0


def test_prior_fisher_of_single_gaussian():
    prior = PriorModel(components=[GaussianComponent(weight=1.0, mean=0.5, variance=0.01)], alpha_var=1e-12)
    config = scene_config(n_tx=4, n_rx=4)
    scene = precompute(config, prior, make_quadrature(prior, 64))
    assert scene.prior_fi == pytest.approx(100.0, rel=1e-3)
    assert scene.gamma == pytest.approx(2e-12)
    assert scene.alpha_var == pytest.approx(1e-12)


def test_precompute_is_converged_in_node_count(reference_experiment, reference_prepared):
    config = reference_prepared.config
    fine = precompute(config, reference_experiment.prior, make_quadrature(reference_experiment.prior, 256))
    coarse = reference_prepared.scene
    assert np.linalg.norm(coarse.a1 - fine.a1) <= 1e-8 * np.linalg.norm(fine.a1)
    assert np.linalg.norm(coarse.a2 - fine.a2) <= 1e-8 * np.linalg.norm(fine.a2)
    assert coarse.prior_fi == pytest.approx(fine.prior_fi, rel=1e-8)


def test_precompute_concentrated_prior_matches_point_values():
    prior = PriorModel(components=[GaussianComponent(weight=1.0, mean=0.7, variance=1e-10)], alpha_var=1.0)
    config = scene_config(n_tx=3, n_rx=2)
    scene = precompute(config, prior, make_quadrature(prior, 16))
    a, b = steering(config, 0.7, "tx"), steering(config, 0.7, "rx")
    a_dot, b_dot = steering_derivative(config, 0.7, "tx"), steering_derivative(config, 0.7, "rx")
    np.testing.assert_allclose(scene.a2, np.outer(b, a.conj()), rtol=1e-6, atol=1e-8)
    np.testing.assert_allclose(scene.a1, np.outer(b_dot, a.conj()) + np.outer(b, a_dot.conj()), rtol=1e-6, atol=1e-7)
    assert scene.a1.shape == (2, 3)


def test_design_wraps_phases_and_validates_covariance():
    design = Design(xi=[-0.5, 7.0], phi=[2 * math.pi], r_x=np.eye(2))
    assert np.all((design.xi >= 0) & (design.xi < 2 * math.pi))
    assert design.phi[0] == pytest.approx(0.0)
    assert design.power == pytest.approx(2.0)
    with pytest.raises(ValueError, match="Hermitian"):
        Design(xi=[0, 0], phi=[0], r_x=np.array([[1, 1j], [1j, 1]]))
    with pytest.raises(ValueError, match="positive semidefinite"):
        Design(xi=[0, 0], phi=[0], r_x=np.diag([1.0, -1.0]))
    with pytest.raises(ValueError, match="2x2"):
        Design(xi=[0, 0], phi=[0], r_x=np.eye(3))
    with pytest.raises(ValueError, match="power budget"):
        design.check_power(1.0)


@given(phases)
def test_wrap_phase_range(phase):
    wrapped = float(wrap_phase(phase))
    assert 0.0 <= wrapped < 2 * math.pi
    assert math.cos(wrapped) == pytest.approx(math.cos(phase), abs=1e-9)


def test_prior_fisher_matches_monte_carlo(reference_experiment, reference_prepared):
    prior = reference_experiment.prior
    rng = np.random.default_rng(7)
    n = 1_000_000
    k = rng.choice(len(prior.components), size=n, p=prior.weights)
    theta = prior.means[k] + np.sqrt(prior.variances[k]) * rng.standard_normal(n)
    squared = gmm_score(prior, theta) ** 2
    std_err = squared.std(ddof=1) / math.sqrt(n)
    assert abs(reference_prepared.scene.prior_fi - squared.mean()) <= 3 * std_err


def test_prior_fisher_shrinks_with_variance():
    config = scene_config(n_tx=2, n_rx=2)
    values = []
    for variance in (1e-3, 1e-2, 1e-1, 1.0):
        prior = PriorModel(components=[GaussianComponent(weight=1.0, mean=0.2, variance=variance)], alpha_var=1.0)
        values.append(precompute(config, prior, make_quadrature(prior, 32)).prior_fi)
    assert all(later < earlier for earlier, later in zip(values, values[1:]))
    assert values[-1] == pytest.approx(1.0, rel=1e-3)


def test_averaged_steering_product_is_bounded(reference_prepared):
    # entries are prior averages of unit-modulus values
    scene = reference_prepared.scene
    bound = math.sqrt(scene.n_rx * scene.n_tx)
    assert np.linalg.norm(scene.a2) <= bound * (1 + 1e-9)
    assert np.all(np.abs(scene.a2) <= 1 + 1e-9)
