"""
Bayesian Fisher Information and BCRB
====================================

Assembles the observation and prior blocks of the Bayesian Fisher
information for ζ = (θ, α_R, α_I) and evaluates the bound on the angle MSE.

The cross block between θ and α vanishes for a zero-mean reflection
coefficient, so the 3×3 information matrix is block-diagonal and the angle
bound is a scalar inverse.
"""

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.linalg import block_diag

from .model import Design, PrecomputedScene, rx_pfvs, tx_pfvs
from .numerics import kron
from .schemas import SceneConfig

logger = logging.getLogger(__name__)

Method = Literal["entrywise", "kron"]


def effective_matrix(a: np.ndarray, psi: np.ndarray, tx_vecs: np.ndarray, rx_vecs: np.ndarray) -> np.ndarray:
    """
    q_mn = e_m^H Ψ [A]_mn f_n for stacked PFVs (rows = antennas).

    Works for any per-antenna polarization vectors, not only the phase
    parameterized ones.
    """
    gains = rx_vecs.conj() @ psi @ tx_vecs.T
    return np.asarray(a) * gains


def effective_matrix_kron(a: np.ndarray, psi: np.ndarray, tx_vecs: np.ndarray, rx_vecs: np.ndarray) -> np.ndarray:
    """Same as effective_matrix, through the full 2M×2N polarized matrix"""
    f_blk = block_diag(*[f[:, None] for f in tx_vecs])
    e_blk = block_diag(*[e[:, None] for e in rx_vecs])
    # antenna-major blocks: block (m, n) is [A]_mn Ψ
    polarized = kron(a, psi)
    return e_blk.conj().T @ polarized @ f_blk


def _matrix(a: np.ndarray, scene: PrecomputedScene, design: Design, method: Method) -> np.ndarray:
    if design.n_tx != scene.n_tx or design.n_rx != scene.n_rx:
        raise ValueError(
            f"design is {design.n_rx}x{design.n_tx} but the scene is {scene.n_rx}x{scene.n_tx}"
        )
    builder = effective_matrix if method == "entrywise" else effective_matrix_kron
    return builder(a, scene.psi, tx_pfvs(design.xi), rx_pfvs(design.phi))


def q_matrix(scene: PrecomputedScene, design: Design, method: Method = "entrywise") -> np.ndarray:
    """Q(ξ, φ) = E^H(φ)(Ψ ⊗ Ã₁)F(ξ)"""
    return _matrix(scene.a1, scene, design, method)


def o_matrix(scene: PrecomputedScene, design: Design, method: Method = "entrywise") -> np.ndarray:
    """O(ξ, φ) = E^H(φ)(Ψ ⊗ Ã₂)F(ξ)"""
    return _matrix(scene.a2, scene, design, method)


def quadratic_trace(q: np.ndarray, r_x: np.ndarray) -> float:
    """tr(Q R Q^H), real part (the imaginary part is rounding only)"""
    return float(np.real(np.sum((q @ r_x) * q.conj())))


def objective(scene: PrecomputedScene, design: Design) -> float:
    """Design objective tr(Q R_X Q^H), maximized by the optimizer"""
    return quadratic_trace(q_matrix(scene, design), design.r_x)


def observation_gain(scene: PrecomputedScene, config: SceneConfig) -> float:
    """Factor 2Lγ/σ_s² that turns the objective into J_O^θθ"""
    return 2.0 * config.n_samples * scene.gamma / config.noise_power_w


def bcrb_from_objective(value: float, scene: PrecomputedScene, config: SceneConfig) -> float:
    return 1.0 / (observation_gain(scene, config) * value + scene.prior_fi)


@dataclass(frozen=True)
class Bfim:
    """
    Block-diagonal Bayesian Fisher information for (θ, α_R, α_I).

    Attributes:
        j_theta_theta: Observation information for θ
        j_alpha_alpha: Observation information per α component (times I₂)
        prior_diag: Diagonal of the prior information
    """
    j_theta_theta: float
    j_alpha_alpha: float
    prior_diag: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        observed = np.diag([self.j_theta_theta, self.j_alpha_alpha, self.j_alpha_alpha])
        return observed + np.diag(self.prior_diag)

    @property
    def bcrb_theta(self) -> float:
        return 1.0 / (self.j_theta_theta + self.prior_diag[0])


def bfim(scene: PrecomputedScene, config: SceneConfig, design: Design) -> Bfim:
    """
    Evaluate the information blocks for a design.

    Returns:
        Bfim: j_theta_theta = (2Lγ/σ_s²)·tr(QRQ^H),
        j_alpha_alpha = (2L/σ_s²)·tr(ORO^H), prior diagonal
        (prior_fi, 1/σ_α², 1/σ_α²)
    """
    j_theta_theta = observation_gain(scene, config) * objective(scene, design)
    j_alpha_alpha = 2.0 * config.n_samples / config.noise_power_w * quadratic_trace(o_matrix(scene, design), design.r_x)
    alpha_fi = 1.0 / scene.alpha_var
    return Bfim(
        j_theta_theta=j_theta_theta,
        j_alpha_alpha=j_alpha_alpha,
        prior_diag=np.array([scene.prior_fi, alpha_fi, alpha_fi]),
    )


def bcrb_theta(scene: PrecomputedScene, config: SceneConfig, design: Design) -> float:
    """Bound on the angle MSE, 1 / (J_O^θθ + E[score²])"""
    return bcrb_from_objective(objective(scene, design), scene, config)
