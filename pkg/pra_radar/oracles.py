# pra_radar/oracles.py

"""
Verification Oracles
====================

Brute-force and statistical cross-checks for the closed forms. Nothing in
here imports the model, bound or optimizer code: the signal model is
transcribed a second time so that a shared bug cannot cancel out.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

logger = logging.getLogger(__name__)


def grid_phase_oracle(evaluate: Callable[[float], float], n_grid: int = 4096) -> Tuple[float, float]:
    """
    Exhaustive maximum over {2πk/n_grid : k = 0..n_grid−1}.

    Returns:
        tuple: (best_phase, best_value); the first grid point wins ties
    """
    if n_grid < 2:
        raise ValueError(f"n_grid must be >= 2, got {n_grid}")
    grid = 2.0 * math.pi * np.arange(n_grid) / n_grid
    values = np.array([float(evaluate(float(p))) for p in grid])
    best = int(np.argmax(values))
    return float(grid[best]), float(values[best])


def random_feasible_covariance(n: int, power: float, seed) -> np.ndarray:
    """Random full-rank Hermitian PSD matrix with trace equal to ``power``"""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if power <= 0:
        raise ValueError(f"power must be positive, got {power}")
    rng = np.random.default_rng(seed)
    factor = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    cov = factor @ factor.conj().T
    cov = 0.5 * (cov + cov.conj().T)
    return cov * (power / float(np.real(np.trace(cov))))


# ----------------------------------------
# Monte Carlo Fisher information
# ----------------------------------------

@dataclass(frozen=True)
class MonteCarloFisher:
    """
    Sample moments of the likelihood scores.

    Attributes:
        estimate: Mean of (∂ ln f/∂θ)²
        std_error: Standard error of ``estimate``
        cross_estimate: Mean of (∂ ln f/∂θ)(∂ ln f/∂α_R)
        cross_std_error: Standard error of ``cross_estimate``
        n_samples: Number of draws
    """
    estimate: float
    std_error: float
    cross_estimate: float
    cross_std_error: float
    n_samples: int


class _RunningMoments:
    """Mean and spread merged batch by batch (Chan et al. pairwise update)"""

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def add(self, values: np.ndarray) -> None:
        n_b = values.size
        if n_b == 0:
            return
        mean_b = float(values.mean())
        m2_b = float(np.sum((values - mean_b) ** 2))
        total = self.count + n_b
        delta = mean_b - self.mean
        self.mean += delta * n_b / total
        self.m2 += m2_b + delta**2 * self.count * n_b / total
        self.count = total

    @property
    def std_error(self) -> float:
        if self.count < 2:
            return 0.0
        return math.sqrt(self.m2 / (self.count - 1) / self.count)


def _array_response(n: int, spacing_ratio: float, theta: np.ndarray) -> np.ndarray:
    # element positions (n+1)/2 − k for k = 1..n, in half-spacings
    k = np.arange(1, n + 1)
    pos = (n + 1.0 - 2.0 * k)
    return np.exp(-1j * math.pi * spacing_ratio * np.sin(theta)[:, None] * pos[None, :])


def _polarization_gains(xi: np.ndarray, phi: np.ndarray, xpd_inv: float) -> np.ndarray:
    """g_mn = e_m^H Ψ f_n written out component-wise"""
    c = math.sqrt(xpd_inv)
    norm = 1.0 / math.sqrt(1.0 + xpd_inv)
    f_v = np.full(xi.shape, 1.0 / math.sqrt(2.0), dtype=complex)
    f_h = np.exp(1j * xi) / math.sqrt(2.0)
    # Ψ f: vertical port gets f_v + c f_h, horizontal gets c f_v + f_h
    out_v = norm * (f_v + c * f_h)
    out_h = norm * (c * f_v + f_h)
    e_h_conj = np.exp(-1j * phi)
    return out_v[None, :] + e_h_conj[:, None] * out_h[None, :]


def _waveform(r_x: np.ndarray, n_samples: int) -> np.ndarray:
    """N×L matrix X with (1/L) X X^H = R_X"""
    vals, vecs = np.linalg.eigh(0.5 * (r_x + r_x.conj().T))
    vals = np.clip(vals, 0.0, None)
    keep = vals > 1e-12 * max(float(vals.max(initial=0.0)), 1e-300)
    rank = int(np.count_nonzero(keep))
    n_tx = r_x.shape[0]
    if rank == 0:
        return np.zeros((n_tx, n_samples), dtype=complex)
    if rank == 1:
        top = vecs[:, -1] * math.sqrt(vals[-1])
        return np.repeat(top[:, None], n_samples, axis=1)
    if rank > n_samples:
        raise ValueError(f"rank(R_X)={rank} cannot be realized with L={n_samples} samples")
    x = np.zeros((n_tx, n_samples), dtype=complex)
    x[:, :rank] = math.sqrt(n_samples) * vecs[:, keep] * np.sqrt(vals[keep])[None, :]
    return x


def mc_fisher_theta(
    config,
    prior,
    design,
    n_mc: int,
    fd_step: float = 1e-5,
    seed=0,
    batch_size: int = 20_000,
) -> MonteCarloFisher:
    """
    Monte Carlo estimate of E[(∂ ln f(Y|ζ)/∂θ)²] and of the θ–α_R cross moment.

    Draws θ from the mixture, α = α_R + jα_I with α_R, α_I ~ N(0, σ_α²), and
    Y = α·H(θ)X + noise with H_mn = b_m(θ) a_n(θ)* e_m^H Ψ f_n. The scores are
    central differences of −‖Y − αH(θ)X‖²/σ_s² (the θ-free terms of the
    log-likelihood cancel); the α step is fd_step·σ_α.

    Args:
        config: SceneConfig
        prior: PriorModel
        design: Object with xi, phi and r_x
        n_mc: Number of draws
        fd_step: Finite-difference step in θ (radians)
        seed: Seed for the batch substreams
        batch_size: Draws per vectorized batch

    Raises:
        ValueError: n_mc < 1 or rank(R_X) > L
        FloatingPointError: non-finite log-likelihood
    """
    if n_mc < 1:
        raise ValueError(f"n_mc must be >= 1, got {n_mc}")

    weights = np.array([c.weight for c in prior.components])
    means = np.array([c.mean for c in prior.components])
    sigmas = np.sqrt(np.array([c.variance for c in prior.components]))
    alpha_sigma = math.sqrt(prior.alpha_var)
    noise_var = config.noise_power_w

    gains = _polarization_gains(np.asarray(design.xi, float), np.asarray(design.phi, float), config.xpd_inv)
    x = _waveform(np.asarray(design.r_x, dtype=complex), config.n_samples)

    def channel(theta: np.ndarray) -> np.ndarray:
        a = _array_response(config.n_tx, config.spacing_ratio, theta)
        b = _array_response(config.n_rx, config.spacing_ratio, theta)
        return b[:, :, None] * a.conj()[:, None, :] * gains[None, :, :]

    def log_lik(y: np.ndarray, alpha: np.ndarray, theta: np.ndarray) -> np.ndarray:
        resid = y - alpha[:, None, None] * (channel(theta) @ x)
        value = -np.sum(np.abs(resid) ** 2, axis=(1, 2)) / noise_var
        if not np.all(np.isfinite(value)):
            raise FloatingPointError("non-finite log-likelihood")
        return value

    theta_moments = _RunningMoments()
    cross_moments = _RunningMoments()
    n_batches = math.ceil(n_mc / batch_size)
    streams = np.random.SeedSequence(seed).spawn(n_batches)
    alpha_step = fd_step * alpha_sigma

    for index, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        size = min(batch_size, n_mc - index * batch_size)

        comp = rng.choice(weights.size, size=size, p=weights)
        theta = means[comp] + sigmas[comp] * rng.standard_normal(size)
        alpha = alpha_sigma * (rng.standard_normal(size) + 1j * rng.standard_normal(size))
        noise = math.sqrt(noise_var / 2.0) * (
            rng.standard_normal((size, config.n_rx, config.n_samples))
            + 1j * rng.standard_normal((size, config.n_rx, config.n_samples))
        )
        y = alpha[:, None, None] * (channel(theta) @ x) + noise

        score_theta = (log_lik(y, alpha, theta + fd_step) - log_lik(y, alpha, theta - fd_step)) / (2.0 * fd_step)
        score_alpha = (log_lik(y, alpha + alpha_step, theta) - log_lik(y, alpha - alpha_step, theta)) / (2.0 * alpha_step)

        theta_moments.add(score_theta**2)
        cross_moments.add(score_theta * score_alpha)

    result = MonteCarloFisher(
        estimate=theta_moments.mean,
        std_error=theta_moments.std_error,
        cross_estimate=cross_moments.mean,
        cross_std_error=cross_moments.std_error,
        n_samples=theta_moments.count,
    )
    logger.info(
        f"MC Fisher: {result.estimate:.6g} ± {result.std_error:.2g} over {result.n_samples} draws, "
        f"cross {result.cross_estimate:.3g} ± {result.cross_std_error:.2g}"
    )
    return result
