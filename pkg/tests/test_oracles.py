import math

import numpy as np
import pytest

from pra_radar.bcrb import bfim
from pra_radar.model import pfv_rx
from pra_radar.optimizer import run_ao, update_receive_phase
from pra_radar.oracles import grid_phase_oracle, mc_fisher_theta, random_feasible_covariance
from pra_radar.verification import check_fisher, run_verification


def test_grid_oracle_cosine():
    phase, value = grid_phase_oracle(math.cos, 4096)
    assert phase == 0.0
    assert value == 1.0


def test_grid_oracle_closed_form_example():
    # e^H K e = const + 2 Re([K]_21 e^{-jφ}), peak at ∠[K]_21 = π/4
    k = np.array([[1.0, 1.0 - 1.0j], [1.0 + 1.0j, 1.0]])
    phase, _ = grid_phase_oracle(lambda p: np.vdot(pfv_rx(p), k @ pfv_rx(p)).real, 4096)
    assert abs(phase - math.pi / 4) <= 2 * math.pi / 4096
    assert abs(update_receive_phase(k) - phase) <= 2 * math.pi / 4096


def test_grid_oracle_needs_two_points():
    with pytest.raises(ValueError, match="n_grid"):
        grid_phase_oracle(math.cos, 1)


def test_random_feasible_covariance_properties():
    for seed in range(10):
        r = random_feasible_covariance(6, 2.5, seed)
        np.testing.assert_allclose(r, r.conj().T, atol=1e-14)
        assert np.trace(r).real == pytest.approx(2.5, rel=1e-12)
        assert np.linalg.eigvalsh(r)[0] > 0
    np.testing.assert_array_equal(random_feasible_covariance(3, 1.0, 5), random_feasible_covariance(3, 1.0, 5))


def test_random_feasible_covariance_rejects_bad_arguments():
    with pytest.raises(ValueError, match="n must be"):
        random_feasible_covariance(0, 1.0, 0)
    with pytest.raises(ValueError, match="power"):
        random_feasible_covariance(2, 0.0, 0)


# ----------------------------------------
# Monte Carlo Fisher information
# ----------------------------------------

@pytest.fixture(scope="module")
def verify_design(verify_prepared):
    return run_ao(verify_prepared.scene, verify_prepared.config, verify_prepared.experiment.ao).design


def test_mc_fisher_without_signal_is_zero(verify_prepared, verify_design):
    silent = verify_design.with_covariance(np.zeros((2, 2)))
    mc = mc_fisher_theta(verify_prepared.config, verify_prepared.experiment.prior, silent, n_mc=2000, seed=1)
    assert abs(mc.estimate) <= 3 * mc.std_error + 1e-12
    assert mc.n_samples == 2000


def test_mc_fisher_matches_closed_form(verify_prepared, verify_design):
    analytic = bfim(verify_prepared.scene, verify_prepared.config, verify_design).j_theta_theta
    mc = mc_fisher_theta(verify_prepared.config, verify_prepared.experiment.prior, verify_design, n_mc=50_000, seed=3)
    assert mc.estimate == pytest.approx(analytic, rel=0.05)
    assert abs(mc.cross_estimate) <= 3 * mc.cross_std_error


@pytest.mark.slow
def test_mc_fisher_full_sample(verify_prepared, verify_design):
    checks = check_fisher(verify_prepared, verify_design)
    assert all(check.passed for check in checks), checks


def test_mc_fisher_batches_do_not_change_sample_count(verify_prepared, verify_design):
    mc = mc_fisher_theta(
        verify_prepared.config, verify_prepared.experiment.prior, verify_design, n_mc=2500, seed=0, batch_size=1000
    )
    assert mc.n_samples == 2500


def test_mc_fisher_rejects_empty_run(verify_prepared, verify_design):
    with pytest.raises(ValueError, match="n_mc"):
        mc_fisher_theta(verify_prepared.config, verify_prepared.experiment.prior, verify_design, n_mc=0)


def test_mc_fisher_rejects_unrealizable_covariance(verify_prepared, verify_design):
    config = verify_prepared.config.model_copy(update={"n_samples": 1})
    full_rank = verify_design.with_covariance(np.eye(2))
    with pytest.raises(ValueError, match="cannot be realized"):
        mc_fisher_theta(config, verify_prepared.experiment.prior, full_rank, n_mc=10)


# ----------------------------------------
# full check list
# ----------------------------------------

def test_verification_passes(quick_verify_prepared):
    checks = run_verification(quick_verify_prepared)
    names = [check.check for check in checks]
    assert names[0] == "quadrature_a1"
    assert "mc_fisher_theta_rel_error" in names
    failed = [check for check in checks if not check.passed]
    assert not failed, failed


def test_verification_catches_corrupted_channel(quick_verify_prepared):
    checks = {check.check: check for check in run_verification(quick_verify_prepared, corrupt_a1=1.5)}
    assert not checks["mc_fisher_theta_rel_error"].passed
    assert checks["objective_identity"].passed
