"""
Radar Scene Model
=================

Array steering vectors, polarforming vectors/matrices, the depolarization
matrix, the Gaussian-mixture angle prior and the prior-averaged matrices
that the Bayesian bound is built from.

Antenna indices are 1-based in the formulas (offset N − 2n + 1) and 0-based
in storage.
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from scipy.linalg import block_diag

from .numerics import QuadratureRule, integrate_matrix
from .schemas import PriorModel, SceneConfig

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

Side = Literal["tx", "rx"]


def wrap_phase(values) -> np.ndarray:
    """Map phases to [0, 2π)"""
    wrapped = np.mod(np.asarray(values, dtype=float), TWO_PI)
    # np.mod can round tiny negatives up to exactly 2π
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)


def _offsets(n: int) -> np.ndarray:
    idx = np.arange(1, n + 1)
    return (n - 2 * idx + 1).astype(float)


def _array_size(config: SceneConfig, side: Side) -> int:
    if side == "tx":
        return config.n_tx
    if side == "rx":
        return config.n_rx
    raise ValueError(f"side must be 'tx' or 'rx', got {side!r}")


def steering(config: SceneConfig, theta, side: Side) -> np.ndarray:
    """
    ULA steering vector, n-th entry exp(−jπ(d/λ)(N − 2n + 1)sinθ).

    ``theta`` may be a scalar (returns shape (N,)) or an array (returns
    shape theta.shape + (N,)).
    """
    offsets = _offsets(_array_size(config, side))
    phase = np.pi * config.spacing_ratio * np.multiply.outer(np.sin(theta), offsets)
    return np.exp(-1j * phase)


def steering_derivative(config: SceneConfig, theta, side: Side) -> np.ndarray:
    """∂/∂θ of the steering vector"""
    offsets = _offsets(_array_size(config, side))
    factor = -1j * np.pi * config.spacing_ratio * np.multiply.outer(np.cos(theta), offsets)
    return factor * steering(config, theta, side)


def pfv_tx(xi) -> np.ndarray:
    """Transmit polarforming vector (1/√2)[1, e^{jξ}]"""
    return np.array([1.0, np.exp(1j * float(xi))]) / math.sqrt(2.0)


def pfv_rx(phi) -> np.ndarray:
    """Receive polarforming vector [1, e^{jφ}]"""
    return np.array([1.0, np.exp(1j * float(phi))], dtype=complex)


def tx_pfvs(xi) -> np.ndarray:
    """Stacked transmit PFVs, one row per antenna (N × 2)"""
    xi = np.asarray(xi, dtype=float)
    return np.stack([np.ones_like(xi), np.exp(1j * xi)], axis=-1) / math.sqrt(2.0)


def rx_pfvs(phi) -> np.ndarray:
    """Stacked receive PFVs, one row per antenna (M × 2)"""
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.ones_like(phi), np.exp(1j * phi)], axis=-1).astype(complex)


def pfm_tx(xi, n_tx: Optional[int] = None) -> np.ndarray:
    """Block-diagonal transmit polarforming matrix F(ξ), 2N × N"""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if n_tx is not None and xi.shape[0] != n_tx:
        raise ValueError(f"expected {n_tx} transmit phases, got {xi.shape[0]}")
    return block_diag(*[pfv_tx(x)[:, None] for x in xi])


def pfm_rx(phi, n_rx: Optional[int] = None) -> np.ndarray:
    """Block-diagonal receive polarforming matrix E(φ), 2M × M"""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    if n_rx is not None and phi.shape[0] != n_rx:
        raise ValueError(f"expected {n_rx} receive phases, got {phi.shape[0]}")
    return block_diag(*[pfv_rx(p)[:, None] for p in phi])


def depolarization(xpd_inv: float) -> np.ndarray:
    """Coupling/crosstalk matrix Ψ for inverse XPD χ"""
    if xpd_inv < 0:
        raise ValueError(f"xpd_inv must be >= 0, got {xpd_inv}")
    s = math.sqrt(xpd_inv)
    return np.array([[1.0, s], [s, 1.0]]) / math.sqrt(1.0 + xpd_inv)


def gmm_pdf(prior: PriorModel, theta):
    """Mixture density Σ_k p_k N(θ; θ_k, σ_k²)"""
    theta = np.asarray(theta, dtype=float)
    diff = np.subtract.outer(theta, prior.means)
    dens = prior.weights * np.exp(-0.5 * diff**2 / prior.variances) / np.sqrt(TWO_PI * prior.variances)
    return dens.sum(axis=-1)


def gmm_score(prior: PriorModel, theta):
    """∂ ln p_Θ / ∂θ; zero where the density underflows"""
    theta = np.asarray(theta, dtype=float)
    diff = np.subtract.outer(theta, prior.means)
    dens = prior.weights * np.exp(-0.5 * diff**2 / prior.variances) / np.sqrt(TWO_PI * prior.variances)
    pdf = dens.sum(axis=-1)
    slope = (dens * (-diff) / prior.variances).sum(axis=-1)
    safe = np.where(pdf > 0, pdf, 1.0)
    return np.where(pdf > 0, slope / safe, 0.0)


@dataclass(frozen=True)
class Design:
    """
    Optimization variables: phase vectors and transmit sample covariance.

    Phases are wrapped to [0, 2π) on construction; r_x must be Hermitian PSD.
    """
    xi: np.ndarray
    phi: np.ndarray
    r_x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xi", wrap_phase(np.atleast_1d(self.xi)))
        object.__setattr__(self, "phi", wrap_phase(np.atleast_1d(self.phi)))
        r_x = np.asarray(self.r_x, dtype=complex)
        n = self.xi.shape[0]
        if r_x.shape != (n, n):
            raise ValueError(f"r_x must be {n}x{n}, got {r_x.shape}")
        if np.max(np.abs(r_x - r_x.conj().T)) > 1e-10 * max(1.0, float(np.max(np.abs(r_x)))):
            raise ValueError("r_x is not Hermitian")
        trace = float(np.real(np.trace(r_x)))
        if np.linalg.eigvalsh(0.5 * (r_x + r_x.conj().T))[0] < -1e-9 * max(trace, 1e-300):
            raise ValueError("r_x is not positive semidefinite")
        object.__setattr__(self, "r_x", r_x)

    @property
    def n_tx(self) -> int:
        return self.xi.shape[0]

    @property
    def n_rx(self) -> int:
        return self.phi.shape[0]

    @property
    def power(self) -> float:
        return float(np.real(np.trace(self.r_x)))

    def check_power(self, power_w: float) -> None:
        if self.power > power_w + 1e-9:
            raise ValueError(f"trace(r_x)={self.power:.12g} exceeds the power budget {power_w:.12g}")

    def with_covariance(self, r_x: np.ndarray) -> "Design":
        return Design(xi=self.xi, phi=self.phi, r_x=r_x)


@dataclass(frozen=True)
class PrecomputedScene:
    """
    Everything integrated over θ once per scene.

    Attributes:
        a1: Prior-averaged steering derivative matrix (M × N)
        a2: Prior-averaged steering matrix (M × N)
        psi: Depolarization matrix (2 × 2)
        gamma: Second moment E[α_R² + α_I²]
        prior_fi: Prior Fisher term E[(∂ ln p_Θ/∂θ)²]
    """
    a1: np.ndarray
    a2: np.ndarray
    psi: np.ndarray
    gamma: float
    prior_fi: float

    @property
    def alpha_var(self) -> float:
        return 0.5 * self.gamma

    @property
    def n_tx(self) -> int:
        return self.a1.shape[1]

    @property
    def n_rx(self) -> int:
        return self.a1.shape[0]

    def with_a1(self, a1: np.ndarray) -> "PrecomputedScene":
        return PrecomputedScene(
            a1=np.asarray(a1, dtype=complex),
            a2=self.a2,
            psi=self.psi,
            gamma=self.gamma,
            prior_fi=self.prior_fi,
        )


def precompute(config: SceneConfig, prior: PriorModel, rule: QuadratureRule) -> PrecomputedScene:
    """
    Integrate the steering products against the prior.

    Returns:
        PrecomputedScene with a1 = ∫(ḃa^H + bȧ^H)p dθ, a2 = ∫ba^H p dθ,
        gamma = 2σ_α², prior_fi = ∫score²·p dθ and Ψ(χ)
    """

    def integrand(theta: float) -> np.ndarray:
        a = steering(config, theta, "tx")
        b = steering(config, theta, "rx")
        a_dot = steering_derivative(config, theta, "tx")
        b_dot = steering_derivative(config, theta, "rx")
        weight = float(gmm_pdf(prior, theta))
        return weight * np.stack([
            np.outer(b_dot, a.conj()) + np.outer(b, a_dot.conj()),
            np.outer(b, a.conj()),
        ])

    stacked = integrate_matrix(rule, integrand)
    score = gmm_score(prior, rule.nodes)
    prior_fi = float(rule.integrate(score**2 * gmm_pdf(prior, rule.nodes)))

    scene = PrecomputedScene(
        a1=stacked[0],
        a2=stacked[1],
        psi=depolarization(config.xpd_inv),
        gamma=2.0 * prior.alpha_var,
        prior_fi=prior_fi,
    )
    logger.info(
        f"Scene precomputed: N={config.n_tx}, M={config.n_rx}, {rule.nodes.size} nodes, "
        f"prior_fi={prior_fi:.6g}, |A1|_F={np.linalg.norm(scene.a1):.6g}"
    )
    return scene
