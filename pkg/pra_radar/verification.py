"""
Oracle Cross-Checks
===================

Runs every oracle against the closed forms on one (small) experiment and
reports measured vs expected values with the tolerance that applies.
"""

import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .bcrb import bfim, bcrb_theta, effective_matrix_kron, objective, q_matrix, quadratic_trace
from .experiments import PreparedExperiment
from .model import Design, precompute, pfv_rx, pfv_tx, rx_pfvs, tx_pfvs
from .numerics import make_quadrature
from .optimizer import (
    k_matrix,
    optimal_covariance,
    run_ao,
    update_receive_phase,
    update_transmit_phase,
    v_matrix,
)
from .oracles import grid_phase_oracle, mc_fisher_theta, random_feasible_covariance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VerifyCheck:
    check: str
    measured: float
    expected: float
    tolerance: float
    passed: bool


def _within(check: str, measured: float, expected: float, tolerance: float) -> VerifyCheck:
    return VerifyCheck(check, measured, expected, tolerance, bool(abs(measured - expected) <= tolerance))


def _random_psd_2x2(rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    return g @ g.conj().T


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def check_quadrature(prepared: PreparedExperiment) -> List[VerifyCheck]:
    """Ã₁, Ã₂ and prior_fi against a rule with four times the nodes"""
    experiment = prepared.experiment
    fine_rule = make_quadrature(experiment.prior, 4 * experiment.quadrature_nodes)
    fine = precompute(prepared.config, experiment.prior, fine_rule)
    coarse = prepared.scene
    return [
        _within("quadrature_a1", float(np.linalg.norm(coarse.a1 - fine.a1) / max(np.linalg.norm(fine.a1), 1e-300)), 0.0, 1e-8),
        _within("quadrature_a2", float(np.linalg.norm(coarse.a2 - fine.a2) / np.linalg.norm(fine.a2)), 0.0, 1e-8),
        _within("quadrature_prior_fi", _relative(coarse.prior_fi, fine.prior_fi), 0.0, 1e-8),
    ]


def check_phase_updates(prepared: PreparedExperiment, rng: np.random.Generator) -> List[VerifyCheck]:
    """Closed-form phase updates against the grid oracle on random PSD kernels"""
    settings = prepared.experiment.verify
    worst_rx, worst_tx = 0.0, 0.0
    for _ in range(settings.n_random_kernels):
        k = _random_psd_2x2(rng)
        e = pfv_rx(update_receive_phase(k))
        value = float(np.real(np.vdot(e, k @ e)))
        _, best = grid_phase_oracle(lambda p: float(np.real(np.vdot(pfv_rx(p), k @ pfv_rx(p)))), settings.n_grid)
        worst_rx = max(worst_rx, (best - value) / abs(value))

        v = _random_psd_2x2(rng)
        f = pfv_tx(update_transmit_phase(v))
        value = float(np.real(np.vdot(f, v @ f)))
        _, best = grid_phase_oracle(lambda p: float(np.real(np.vdot(pfv_tx(p), v @ pfv_tx(p)))), settings.n_grid)
        worst_tx = max(worst_tx, (best - value) / abs(value))

    return [
        VerifyCheck("receive_phase_grid_gap", worst_rx, 0.0, 1e-9, worst_rx <= 1e-9),
        VerifyCheck("transmit_phase_grid_gap", worst_tx, 0.0, 1e-9, worst_tx <= 1e-9),
    ]


def check_covariance(prepared: PreparedExperiment, design: Design, rng: np.random.Generator) -> VerifyCheck:
    """No random feasible R_X beats the closed-form covariance"""
    settings = prepared.experiment.verify
    scene, power = prepared.scene, prepared.config.power_w
    q = q_matrix(scene, design)
    r_opt, _ = optimal_covariance(scene, design, power)
    best = quadratic_trace(q, r_opt)
    worst = -math.inf
    for seed in rng.integers(0, 2**63 - 1, settings.n_covariance_draws):
        r = random_feasible_covariance(scene.n_tx, power, int(seed))
        worst = max(worst, (quadratic_trace(q, r) - best) / best)
    return VerifyCheck("covariance_random_gap", worst, 0.0, 1e-12, worst <= 1e-12)


def check_objective_identity(prepared: PreparedExperiment, rng: np.random.Generator) -> VerifyCheck:
    """Trace form, Kronecker path, receive and transmit decompositions agree"""
    settings = prepared.experiment.verify
    scene, power = prepared.scene, prepared.config.power_w
    worst = 0.0
    for _ in range(settings.n_identity_designs):
        xi = rng.uniform(0.0, 2 * math.pi, scene.n_tx)
        phi = rng.uniform(0.0, 2 * math.pi, scene.n_rx)
        r_x = random_feasible_covariance(scene.n_tx, power, int(rng.integers(0, 2**63 - 1)))
        design = Design(xi=xi, phi=phi, r_x=r_x)

        direct = objective(scene, design)
        q_kron = effective_matrix_kron(scene.a1, scene.psi, tx_pfvs(xi), rx_pfvs(phi))
        via_kron = quadratic_trace(q_kron, r_x)
        e = rx_pfvs(phi)
        via_rx = sum(float(np.real(np.vdot(e[m], k_matrix(scene, design, m) @ e[m]))) for m in range(scene.n_rx))
        f = tx_pfvs(xi)
        via_tx = sum(float(np.real(np.vdot(f[n], v_matrix(scene, design, n) @ f[n]))) for n in range(scene.n_tx))
        worst = max(worst, _relative(via_kron, direct), _relative(via_rx, direct), _relative(via_tx, direct))
    return VerifyCheck("objective_identity", worst, 0.0, 1e-10, worst <= 1e-10)


def check_fisher(prepared: PreparedExperiment, design: Design, corrupt_a1: float = 1.0) -> List[VerifyCheck]:
    """
    Monte Carlo score moments against the closed-form J_O^θθ.

    ``corrupt_a1`` scales Ã₁ on the analytic side only; any value other than
    1 must make the check fail.
    """
    experiment = prepared.experiment
    settings = experiment.verify
    analytic_scene = prepared.scene.with_a1(corrupt_a1 * prepared.scene.a1)
    analytic = bfim(analytic_scene, prepared.config, design).j_theta_theta

    mc = mc_fisher_theta(
        prepared.config,
        experiment.prior,
        design,
        n_mc=settings.n_mc,
        fd_step=settings.fd_step,
        seed=settings.seed,
    )
    rel = _relative(mc.estimate, analytic)
    return [
        VerifyCheck("mc_fisher_theta_rel_error", rel, 0.0, settings.mc_rel_tol, rel <= settings.mc_rel_tol),
        VerifyCheck(
            "mc_theta_alpha_cross",
            mc.cross_estimate,
            0.0,
            3.0 * mc.cross_std_error,
            abs(mc.cross_estimate) <= 3.0 * mc.cross_std_error,
        ),
    ]


def check_prior_only(prepared: PreparedExperiment, design: Design) -> VerifyCheck:
    """Zero covariance gives exactly the prior-only bound"""
    silent = design.with_covariance(np.zeros_like(design.r_x))
    bound = bcrb_theta(prepared.scene, prepared.config, silent)
    expected = 1.0 / prepared.scene.prior_fi
    return _within("prior_only_bound", bound, expected, 1e-12 * expected)


def run_verification(prepared: PreparedExperiment, corrupt_a1: float = 1.0) -> List[VerifyCheck]:
    """
    Run every cross-check on the prepared experiment.

    Returns:
        list: one VerifyCheck per statistic, in a fixed order
    """
    experiment = prepared.experiment
    rng = np.random.default_rng(experiment.verify.seed)
    design = run_ao(prepared.scene, prepared.config, experiment.ao).design

    checks: List[VerifyCheck] = []
    checks.extend(check_quadrature(prepared))
    checks.extend(check_phase_updates(prepared, rng))
    checks.append(check_covariance(prepared, design, rng))
    checks.append(check_objective_identity(prepared, rng))
    checks.extend(check_fisher(prepared, design, corrupt_a1))
    checks.append(check_prior_only(prepared, design))

    for check in checks:
        if check.passed:
            logger.info(f"PASS {check.check}: measured {check.measured:.6g} (expected {check.expected:.6g} ± {check.tolerance:.3g})")
        else:
            logger.error(f"FAIL {check.check}: measured {check.measured:.6g}, expected {check.expected:.6g} ± {check.tolerance:.3g}")
    return checks
