import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from pra_radar.model import gmm_pdf
from pra_radar.numerics import (
    ConvergenceError,
    integrate_matrix,
    kron,
    make_quadrature,
    top_hermitian_eigenpair,
)
from pra_radar.schemas import GaussianComponent, PriorModel


def single_prior(mean=0.0, variance=0.01):
    return PriorModel(components=[GaussianComponent(weight=1.0, mean=mean, variance=variance)], alpha_var=1.0)


def test_quadrature_single_component_domain():
    rule = make_quadrature(single_prior(0.0, 0.01), 64)
    assert len(rule.segments) == 1
    assert rule.segments[0] == pytest.approx((-0.8, 0.8), abs=1e-12)
    assert abs(rule.weights.sum() - 1.6) <= 1e-12 * 1.6
    assert np.all(rule.weights > 0)
    assert rule.nodes.min() > -0.8 and rule.nodes.max() < 0.8


def test_quadrature_merges_overlapping_windows():
    prior = PriorModel(
        components=[
            GaussianComponent(weight=0.5, mean=0.0, variance=0.01),
            GaussianComponent(weight=0.5, mean=0.1, variance=0.01),
        ],
        alpha_var=1.0,
    )
    rule = make_quadrature(prior, 16)
    assert len(rule.segments) == 1
    lo, hi = rule.segments[0]
    assert lo == pytest.approx(-0.8, abs=1e-12)
    assert hi == pytest.approx(0.9, abs=1e-12)
    assert rule.total_length == pytest.approx(1.7, rel=1e-12)
    assert np.all(np.diff(rule.nodes) > 0)


def test_quadrature_rejects_too_few_nodes():
    with pytest.raises(ValueError, match="nodes_per_segment"):
        make_quadrature(single_prior(), 1)


def test_mixture_density_integrates_to_one(reference_experiment):
    prior = reference_experiment.prior
    rule = make_quadrature(prior, 64)
    ours = float(rule.integrate(gmm_pdf(prior, rule.nodes)))
    assert abs(ours - 1.0) <= 1e-10

    # adaptive reference on the same support
    reference = sum(
        integrate.quad(lambda t: float(gmm_pdf(prior, t)), a, b, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        for a, b in rule.segments
    )
    assert ours == pytest.approx(reference, abs=1e-10)


def test_integrate_matrix_constant_integrand():
    rule = make_quadrature(single_prior(0.0, 0.01), 64)
    result = integrate_matrix(rule, lambda theta: np.eye(2))
    np.testing.assert_allclose(result, 1.6 * np.eye(2), rtol=1e-12)


def test_integrate_matrix_rejects_shape_change():
    rule = make_quadrature(single_prior(0.0, 0.01), 4)
    with pytest.raises(ValueError, match="shape"):
        integrate_matrix(rule, lambda theta: np.eye(2) if theta < 0 else np.eye(3))


def test_top_eigenpair_diagonal():
    lam, vec = top_hermitian_eigenpair(np.diag([2.0, 1.0]))
    assert lam == pytest.approx(2.0, rel=1e-12)
    assert abs(abs(vec[0]) - 1.0) < 1e-9


def test_top_eigenpair_matches_dense_solver(rng):
    for n in (1, 2, 5, 12):
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        h = g @ g.conj().T
        lam, vec = top_hermitian_eigenpair(h)
        ref_vals, ref_vecs = np.linalg.eigh(h)
        assert lam == pytest.approx(ref_vals[-1], rel=1e-9)
        # same direction up to a global phase
        assert abs(np.vdot(ref_vecs[:, -1], vec)) == pytest.approx(1.0, abs=1e-8)
        assert np.linalg.norm(h @ vec - lam * vec) <= 1e-9 * lam


def test_top_eigenpair_zero_matrix():
    lam, vec = top_hermitian_eigenpair(np.zeros((3, 3)))
    assert lam == 0.0
    assert np.linalg.norm(vec) == pytest.approx(1.0)


def test_top_eigenpair_rejects_bad_input():
    with pytest.raises(ValueError, match="square"):
        top_hermitian_eigenpair(np.ones((2, 3)))
    with pytest.raises(ValueError, match="Hermitian"):
        top_hermitian_eigenpair(np.array([[1.0, 1.0j], [1.0j, 1.0]]))


def test_top_eigenpair_reports_non_convergence():
    with pytest.raises(ConvergenceError) as info:
        top_hermitian_eigenpair(np.diag([1.0, 0.9999]), max_iter=0)
    assert info.value.eigenvector.shape == (2,)


def random_unitary(rng, n):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    u, _ = np.linalg.qr(g)
    return u


def test_top_eigenpair_near_tie(rng):
    for n in (2, 6):
        u = random_unitary(rng, n)
        spectrum = np.array([0.5 + 5e-8, 0.5 - 5e-8] + [0.1] * (n - 2))
        h = (u * spectrum) @ u.conj().T
        lam, vec = top_hermitian_eigenpair(h)
        assert lam == pytest.approx(0.5, rel=1e-6)
        assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(h @ vec - lam * vec) <= 1e-10 * lam
        # any vector of the tied pair is acceptable
        assert np.linalg.norm(u[:, :2].conj().T @ vec) == pytest.approx(1.0, abs=1e-8)


def test_top_eigenpair_rank_one(rng):
    v = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    v /= np.linalg.norm(v)
    lam, vec = top_hermitian_eigenpair(np.outer(v, v.conj()))
    assert lam == pytest.approx(1.0, rel=1e-12)
    assert abs(np.vdot(v, vec)) == pytest.approx(1.0, abs=1e-10)


def test_top_eigenvalue_bounds_rayleigh_quotients(rng):
    g = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    h = g @ g.conj().T
    lam, _ = top_hermitian_eigenpair(h)
    x = rng.standard_normal((1000, 8)) + 1j * rng.standard_normal((1000, 8))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    quotients = np.real(np.einsum("ki,ij,kj->k", x.conj(), h, x))
    assert np.all(quotients <= lam * (1 + 1e-12))


def test_kron_shape_and_blocks():
    a = np.array([[1.0, 2.0]])
    b = np.eye(2)
    out = kron(a, b)
    assert out.shape == (2, 4)
    np.testing.assert_array_equal(out[:, 2:], 2.0 * np.eye(2))


@settings(max_examples=50, deadline=None)
@given(
    re=st.floats(-10, 10, allow_nan=False),
    im=st.floats(-10, 10, allow_nan=False),
    seed=st.integers(0, 2**32 - 1),
)
def test_kron_scalar_law(re, im, seed):
    r = np.random.default_rng(seed)
    a = r.standard_normal((2, 3)) + 1j * r.standard_normal((2, 3))
    b = r.standard_normal((2, 2))
    c = complex(re, im)
    np.testing.assert_allclose(kron(c * a, b), c * kron(a, b), rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(kron(a, c * b), c * kron(a, b), rtol=1e-12, atol=1e-12)


def test_quadrature_exact_for_polynomials_per_panel():
    rule = make_quadrature(single_prior(0.0, 0.01), 8)
    # degree 15 is integrated exactly on every panel
    values = rule.nodes**14
    exact = 2 * 0.8**15 / 15
    assert float(rule.integrate(values)) == pytest.approx(exact, rel=1e-12)
    assert math.isclose(rule.total_length, 1.6, rel_tol=1e-12)
