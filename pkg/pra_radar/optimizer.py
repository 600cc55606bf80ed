"""
Alternating Optimization
========================

Closed-form block updates for maximizing tr(Q R_X Q^H):

- R_X: P times the strongest eigenvector outer product of Q^H Q
- φ_m: angle of the off-diagonal of the 2×2 receive kernel K_m
- ξ_n: angle of the off-diagonal of the 2×2 transmit kernel V_n

The alternation engine is shared with the benchmark schemes; only the
per-antenna polarization rule changes (see ``PolarizationRule``).
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np

from .bcrb import effective_matrix, quadratic_trace
from .model import TWO_PI, Design, PrecomputedScene, rx_pfvs, tx_pfvs, wrap_phase
from .numerics import top_hermitian_eigenpair
from .schemas import AoSettings, SceneConfig

logger = logging.getLogger(__name__)

Termination = Literal["converged", "max_iters"]

# Off-diagonals smaller than this leave the phase at 0
PHASE_TIE_TOL = 1e-15

# t with t^H f(ξ) = 1 for every ξ, used to fold the linear term into V_n
_T_VEC = np.array([math.sqrt(2.0), 0.0], dtype=complex)


@dataclass(frozen=True)
class TraceEntry:
    outer_iter: int
    stage: str
    objective: float


@dataclass(frozen=True)
class OptResult:
    """
    Outcome of the alternating optimization.

    Attributes:
        design: Best design over all starts
        trace: Objective after every sub-update of the best start
        outer_iters: Outer iterations used by the best start
        termination: "converged" or "max_iters"
        degenerate: True if Q vanished at some covariance update
        restart_objectives: Final objective of every start, in start order
    """
    design: Design
    trace: List[TraceEntry]
    outer_iters: int
    termination: Termination
    degenerate: bool = False
    restart_objectives: Tuple[float, ...] = field(default_factory=tuple)

    @property
    def objective(self) -> float:
        return self.trace[-1].objective


# ----------------------------------------
# Closed-form block solutions
# ----------------------------------------

def optimal_covariance_for(q: np.ndarray, power_w: float) -> Tuple[np.ndarray, bool]:
    """
    Maximize tr(Q R Q^H) over R ⪰ 0, tr(R) ≤ P.

    Returns:
        tuple: (R_X, degenerate) with R_X = P·q̃q̃^H, or (P/N)·I flagged
        degenerate when Q = 0
    """
    n = q.shape[1]
    q_norm = np.linalg.norm(q)
    if q_norm == 0.0 or not np.isfinite(q_norm):
        logger.warning("Q vanished; falling back to an isotropic covariance")
        return (power_w / n) * np.eye(n, dtype=complex), True

    # unit-scale Gram matrix keeps the eigen tolerance relative
    q_unit = q / q_norm
    gram = q_unit.conj().T @ q_unit
    gram = 0.5 * (gram + gram.conj().T)
    _, vec = top_hermitian_eigenpair(gram)
    r_x = power_w * np.outer(vec, vec.conj())
    r_x = 0.5 * (r_x + r_x.conj().T)
    r_x *= power_w / float(np.real(np.trace(r_x)))
    return r_x, False


def optimal_covariance(scene: PrecomputedScene, design: Design, power_w: float) -> Tuple[np.ndarray, bool]:
    """Optimal R_X for the phases held in ``design``"""
    q = effective_matrix(scene.a1, scene.psi, tx_pfvs(design.xi), rx_pfvs(design.phi))
    return optimal_covariance_for(q, power_w)


def receive_kernels(a1: np.ndarray, psi: np.ndarray, tx_vecs: np.ndarray, r_x: np.ndarray) -> np.ndarray:
    """
    K_m = Ψ G_m R_X G_m^H Ψ for every receive antenna, shape (M, 2, 2).

    G_m stacks [Ã₁]_mn f_n as its columns; K_m does not depend on φ.
    """
    g = a1[:, None, :] * tx_vecs.T[None, :, :]
    k = psi @ g @ r_x @ np.conj(np.transpose(g, (0, 2, 1))) @ psi
    return 0.5 * (k + np.conj(np.transpose(k, (0, 2, 1))))


def transmit_terms(
    a1: np.ndarray,
    psi: np.ndarray,
    rx_vecs: np.ndarray,
    q: np.ndarray,
    qr: np.ndarray,
    r_x: np.ndarray,
    n: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Quadratic and linear parts of the objective as a function of f_n.

    tr(QRQ^H) = [R]_nn f^H W^H W f + 2 Re(f^H b) + const, where row m of W is
    [Ã₁]_mn e_m^H Ψ and b = W^H (Q R u_n − q_n [R]_nn).

    Returns:
        tuple: (A, b) with A = [R]_nn W^H W (2×2 Hermitian) and b (2,)
    """
    w = a1[:, n, None] * (rx_vecs.conj() @ psi)
    r_nn = float(np.real(r_x[n, n]))
    quad = r_nn * (w.conj().T @ w)
    quad = 0.5 * (quad + quad.conj().T)
    lin = w.conj().T @ (qr[:, n] - q[:, n] * r_nn)
    return quad, lin


def k_matrix(scene: PrecomputedScene, design: Design, m: int) -> np.ndarray:
    """Receive kernel K_m for the 0-based receive index m"""
    if not 0 <= m < scene.n_rx:
        raise ValueError(f"receive index must be in [0, {scene.n_rx}), got {m}")
    return receive_kernels(scene.a1, scene.psi, tx_pfvs(design.xi), design.r_x)[m]


def v_matrix(scene: PrecomputedScene, design: Design, n: int) -> np.ndarray:
    """
    Transmit kernel V_n for the 0-based transmit index n.

    f^H V_n f equals the objective as a function of ξ_n up to a constant, and
    the constant is chosen so that Σ_n f_n^H V_n f_n = tr(QRQ^H) at ``design``.
    """
    if not 0 <= n < scene.n_tx:
        raise ValueError(f"transmit index must be in [0, {scene.n_tx}), got {n}")
    rx = rx_pfvs(design.phi)
    q = effective_matrix(scene.a1, scene.psi, tx_pfvs(design.xi), rx)
    qr = q @ design.r_x
    quad, lin = transmit_terms(scene.a1, scene.psi, rx, q, qr, design.r_x, n)
    v_full = quad + np.outer(lin, _T_VEC.conj()) + np.outer(_T_VEC, lin.conj())

    f_n = tx_pfvs(design.xi[n])
    share = float(np.real(np.vdot(qr[:, n], q[:, n])))
    shift = float(np.real(np.vdot(f_n, v_full @ f_n))) - share
    return v_full - shift * np.eye(2)


def _off_diagonal_phase(h: np.ndarray) -> float:
    off = h[1, 0]
    if abs(off) < PHASE_TIE_TOL:
        return 0.0
    return float(wrap_phase(np.angle(off)))


def update_receive_phase(k: np.ndarray) -> float:
    """φ* = ∠[K_m]_21, maximizes e^H(φ) K_m e(φ)"""
    return _off_diagonal_phase(k)


def update_transmit_phase(v: np.ndarray) -> float:
    """ξ* = ∠[V_n]_21, maximizes f^H(ξ) V_n f(ξ)"""
    return _off_diagonal_phase(v)


# ----------------------------------------
# Alternation engine
# ----------------------------------------

class PolarizationRule(ABC):
    """Per-antenna polarization parameterization and its block updates"""

    name: str = "abstract"

    @abstractmethod
    def tx_vector(self, param: float) -> np.ndarray:
        """Transmit polarization vector for one parameter value"""

    @abstractmethod
    def rx_vector(self, param: float) -> np.ndarray:
        """Receive polarization vector for one parameter value"""

    @abstractmethod
    def update_receive(self, k: np.ndarray) -> float:
        """Maximizer of e^H K e over the receive parameter"""

    @abstractmethod
    def update_transmit(self, quad: np.ndarray, lin: np.ndarray) -> float:
        """Maximizer of f^H A f + 2Re(f^H b) over the transmit parameter"""

    def initial(self, rng: np.random.Generator, n_tx: int, n_rx: int) -> Tuple[np.ndarray, np.ndarray]:
        return initial_phases(rng, n_tx, n_rx)

    def tx_vectors(self, params: np.ndarray) -> np.ndarray:
        return np.stack([self.tx_vector(p) for p in params])

    def rx_vectors(self, params: np.ndarray) -> np.ndarray:
        return np.stack([self.rx_vector(p) for p in params])


class PhaseShiftRule(PolarizationRule):
    """Phase-shifter PRA: f = (1/√2)[1, e^{jξ}], e = [1, e^{jφ}]"""

    name = "proposed_pra"

    def tx_vector(self, param: float) -> np.ndarray:
        return tx_pfvs(param)

    def rx_vector(self, param: float) -> np.ndarray:
        return rx_pfvs(param)

    def tx_vectors(self, params: np.ndarray) -> np.ndarray:
        return tx_pfvs(params)

    def rx_vectors(self, params: np.ndarray) -> np.ndarray:
        return rx_pfvs(params)

    def update_receive(self, k: np.ndarray) -> float:
        return update_receive_phase(k)

    def update_transmit(self, quad: np.ndarray, lin: np.ndarray) -> float:
        v_full = quad + np.outer(lin, _T_VEC.conj()) + np.outer(_T_VEC, lin.conj())
        return update_transmit_phase(v_full)


def restart_rngs(seed: int, count: int) -> List[np.random.Generator]:
    """Independent generators; the k-th stream does not depend on count"""
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(count)]


def initial_phases(rng: np.random.Generator, n_tx: int, n_rx: int) -> Tuple[np.ndarray, np.ndarray]:
    """Uniform phases in [0, 2π): transmit first, then receive"""
    xi = rng.uniform(0.0, TWO_PI, n_tx)
    phi = rng.uniform(0.0, TWO_PI, n_rx)
    return xi, phi


@dataclass
class AlternationRun:
    tx_params: np.ndarray
    rx_params: np.ndarray
    r_x: np.ndarray
    trace: List[TraceEntry]
    outer_iters: int
    termination: Termination
    degenerate: bool

    @property
    def objective(self) -> float:
        return self.trace[-1].objective


def alternate(
    a1: np.ndarray,
    psi: np.ndarray,
    power_w: float,
    rule: PolarizationRule,
    tx_params: np.ndarray,
    rx_params: np.ndarray,
    settings: AoSettings,
) -> AlternationRun:
    """
    One AO run from a given start: R_X, then every receive antenna, then
    every transmit antenna, until the relative objective change over an outer
    iteration drops below ``settings.rel_tol``.

    A block update is kept only if it does not lower the objective, so the
    recorded trace is nondecreasing.
    """
    tx_params = np.array(tx_params, dtype=float)
    rx_params = np.array(rx_params, dtype=float)
    n_rx, n_tx = a1.shape

    trace: List[TraceEntry] = []
    r_x: Optional[np.ndarray] = None
    degenerate = False
    termination: Termination = "max_iters"
    previous_end: Optional[float] = None
    it = 0

    for it in range(1, settings.max_outer_iter + 1):
        tx = rule.tx_vectors(tx_params)
        rx = rule.rx_vectors(rx_params)

        # R_X block
        q = effective_matrix(a1, psi, tx, rx)
        candidate, flagged = optimal_covariance_for(q, power_w)
        degenerate = degenerate or flagged
        if r_x is None or quadratic_trace(q, candidate) >= quadratic_trace(q, r_x):
            r_x = candidate
        trace.append(TraceEntry(it, "covariance", quadratic_trace(q, r_x)))

        # receive blocks; K_m only depends on ξ and R_X
        kernels = receive_kernels(a1, psi, tx, r_x)
        shares = np.real(np.einsum("mp,mpq,mq->m", rx.conj(), kernels, rx))
        for m in range(n_rx):
            param = rule.update_receive(kernels[m])
            e_new = rule.rx_vector(param)
            value = float(np.real(np.vdot(e_new, kernels[m] @ e_new)))
            if value >= shares[m]:
                rx_params[m] = param
                rx[m] = e_new
                shares[m] = value
            trace.append(TraceEntry(it, f"receive_{m + 1}", float(shares.sum())))

        # transmit blocks
        q = effective_matrix(a1, psi, tx, rx)
        qr = q @ r_x
        current = float(np.real(np.sum(qr * q.conj())))
        rows = rx.conj() @ psi
        for n in range(n_tx):
            quad, lin = transmit_terms(a1, psi, rx, q, qr, r_x, n)
            param = rule.update_transmit(quad, lin)
            f_new = rule.tx_vector(param)
            column = a1[:, n] * (rows @ f_new)
            qr_new = qr + np.outer(column - q[:, n], r_x[n, :])
            q_new = q.copy()
            q_new[:, n] = column
            value = float(np.real(np.sum(qr_new * q_new.conj())))
            if value >= current:
                tx_params[n] = param
                tx[n] = f_new
                q, qr, current = q_new, qr_new, value
            trace.append(TraceEntry(it, f"transmit_{n + 1}", current))

        end = trace[-1].objective
        logger.debug(f"[{rule.name}] outer iteration {it}: objective {end:.12g}")
        if previous_end is not None and abs(end - previous_end) <= settings.rel_tol * max(abs(previous_end), 1e-300):
            termination = "converged"
            break
        previous_end = end

    if termination == "max_iters":
        logger.warning(f"[{rule.name}] stopped at max_outer_iter={settings.max_outer_iter} without converging")

    return AlternationRun(
        tx_params=tx_params,
        rx_params=rx_params,
        r_x=r_x,
        trace=trace,
        outer_iters=it,
        termination=termination,
        degenerate=degenerate,
    )


def alternate_with_restarts(
    a1: np.ndarray,
    psi: np.ndarray,
    power_w: float,
    rule: PolarizationRule,
    settings: AoSettings,
    warm_starts: Sequence[Tuple[np.ndarray, np.ndarray]] = (),
) -> Tuple[AlternationRun, Tuple[float, ...]]:
    """Random restarts (seeded) plus optional warm starts; best run wins"""
    n_rx, n_tx = a1.shape
    starts = [rule.initial(rng, n_tx, n_rx) for rng in restart_rngs(settings.rng_seed, settings.n_restarts)]
    starts.extend((np.asarray(tx), np.asarray(rx)) for tx, rx in warm_starts)

    runs = [alternate(a1, psi, power_w, rule, tx, rx, settings) for tx, rx in starts]
    best = max(runs, key=lambda run: run.objective)
    return best, tuple(run.objective for run in runs)


def run_ao(
    scene: PrecomputedScene,
    config: SceneConfig,
    settings: AoSettings,
    warm_starts: Sequence[Design] = (),
) -> OptResult:
    """
    Alternating optimization over ``settings.n_restarts`` random initializations plus any
    warm-start designs; returns the best run.

    Args:
        scene: Precomputed scene
        config: Scene configuration (power budget)
        settings: AO tolerances, iteration cap, restarts and seed
        warm_starts: Designs whose phases seed additional runs

    Returns:
        OptResult: best design, its trace and the per-start objectives
    """
    if scene.n_tx != config.n_tx or scene.n_rx != config.n_rx:
        raise ValueError(
            f"scene is {scene.n_rx}x{scene.n_tx} but config asks for {config.n_rx}x{config.n_tx}"
        )
    rule = PhaseShiftRule()
    best, objectives = alternate_with_restarts(
        scene.a1,
        scene.psi,
        config.power_w,
        rule,
        settings,
        warm_starts=[(d.xi, d.phi) for d in warm_starts],
    )
    if best.degenerate:
        logger.warning("Degenerate scene: Q vanished during the optimization")

    result = OptResult(
        design=Design(xi=best.tx_params, phi=best.rx_params, r_x=best.r_x),
        trace=best.trace,
        outer_iters=best.outer_iters,
        termination=best.termination,
        degenerate=best.degenerate,
        restart_objectives=objectives,
    )
    logger.info(
        f"AO finished: objective {result.objective:.10g} after {result.outer_iters} outer iteration(s) "
        f"({result.termination}, {len(objectives)} start(s))"
    )
    return result
