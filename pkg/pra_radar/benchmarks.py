# pra_radar/benchmarks.py

"""
Benchmark Transceiver Designs
=============================

The proposed PRA design and the six comparison schemes, all evaluated on
one shared ``PrecomputedScene``:

- no_pra: conventional MIMO radar, scalar channel Ã₁ (optionally with the
  depolarization loss 1/√(1+χ))
- cpa / lpa: every antenna fixed to circular / linear polarization
- spra: per-antenna switch between the two circular states
- paa: per-antenna real polarization angle [cos, sin]
- random_phase: uniform random phase shifts, covariance optimized only
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .bcrb import bcrb_from_objective, effective_matrix, quadratic_trace
from .model import TWO_PI, Design, PrecomputedScene, pfv_rx, pfv_tx, rx_pfvs, tx_pfvs
from .optimizer import (
    PhaseShiftRule,
    PolarizationRule,
    alternate_with_restarts,
    initial_phases,
    optimal_covariance_for,
    restart_rngs,
    run_ao,
)
from .schemas import AoSettings, BenchmarkSettings, SceneConfig, SchemeId

logger = logging.getLogger(__name__)

# Circular polarization, identical to the PRA vectors at ξ = φ = π/2
CPA_TX = pfv_tx(math.pi / 2)
CPA_RX = pfv_rx(math.pi / 2)

# Linear (vertical-element) polarization
LPA_TX = np.array([1.0, 0.0], dtype=complex)
LPA_RX = np.array([1.0, 0.0], dtype=complex)

SWITCH_STATES = (math.pi / 2, 3 * math.pi / 2)


@dataclass(frozen=True)
class SchemeResult:
    """
    Optimized (or drawn) transceiver of one scheme.

    ``bcrb`` is evaluated at the noise power of the config the scheme was
    solved with; ``bcrb_at`` re-evaluates it for another noise power, which
    is valid because no scheme's design depends on σ_s².
    """
    scheme: SchemeId
    objective: float
    bcrb: float
    r_x: np.ndarray
    tx_vecs: Optional[np.ndarray] = None
    rx_vecs: Optional[np.ndarray] = None
    tx_params: Optional[np.ndarray] = None
    rx_params: Optional[np.ndarray] = None
    outer_iters: int = 0
    draw_objectives: Tuple[float, ...] = field(default_factory=tuple)
    objective_std_error: float = 0.0
    bcrb_std_error: float = 0.0

    def bcrb_at(self, scene: PrecomputedScene, config: SceneConfig) -> float:
        if self.draw_objectives:
            return float(np.mean([bcrb_from_objective(v, scene, config) for v in self.draw_objectives]))
        return bcrb_from_objective(self.objective, scene, config)

    def phase_design(self) -> Optional[Design]:
        """Design in PRA phase form, if the scheme is a point of the PRA set"""
        if self.scheme not in (SchemeId.PROPOSED_PRA, SchemeId.SPRA, SchemeId.CPA):
            return None
        return Design(xi=self.tx_params, phi=self.rx_params, r_x=self.r_x)


def _covariance_only(
    scheme: SchemeId,
    q: np.ndarray,
    scene: PrecomputedScene,
    config: SceneConfig,
    **extra,
) -> SchemeResult:
    r_x, _ = optimal_covariance_for(q, config.power_w)
    value = quadratic_trace(q, r_x)
    return SchemeResult(
        scheme=scheme,
        objective=value,
        bcrb=bcrb_from_objective(value, scene, config),
        r_x=r_x,
        **extra,
    )


def solve_no_pra(scene: PrecomputedScene, config: SceneConfig, settings: BenchmarkSettings) -> SchemeResult:
    """
    Unpolarized N×M MIMO radar, effective matrix Ã₁.

    With ``settings.no_pra_depolarization`` the channel carries the scalar
    loss 1/√(1+χ); by default it does not depend on χ at all.
    """
    gain = 1.0 / math.sqrt(1.0 + config.xpd_inv) if settings.no_pra_depolarization else 1.0
    return _covariance_only(SchemeId.NO_PRA, gain * scene.a1, scene, config)


def solve_fixed_polarization(
    scene: PrecomputedScene,
    config: SceneConfig,
    f_fixed: np.ndarray,
    e_fixed: np.ndarray,
    scheme: SchemeId = SchemeId.CPA,
) -> SchemeResult:
    """
    Same PFV on every antenna; only R_X is optimized.

    Raises:
        ValueError: ‖f‖ > 1 or ‖e‖ > √2
    """
    f_fixed = np.asarray(f_fixed, dtype=complex).reshape(2)
    e_fixed = np.asarray(e_fixed, dtype=complex).reshape(2)
    if np.linalg.norm(f_fixed) > 1.0 + 1e-12:
        raise ValueError(f"transmit PFV norm must be <= 1, got {np.linalg.norm(f_fixed):.6g}")
    if np.linalg.norm(e_fixed) > math.sqrt(2.0) + 1e-12:
        raise ValueError(f"receive PFV norm must be <= sqrt(2), got {np.linalg.norm(e_fixed):.6g}")

    tx = np.tile(f_fixed, (scene.n_tx, 1))
    rx = np.tile(e_fixed, (scene.n_rx, 1))
    extra = {"tx_vecs": tx, "rx_vecs": rx}
    if scheme == SchemeId.CPA:
        extra["tx_params"] = np.full(scene.n_tx, math.pi / 2)
        extra["rx_params"] = np.full(scene.n_rx, math.pi / 2)
    return _covariance_only(scheme, effective_matrix(scene.a1, scene.psi, tx, rx), scene, config, **extra)


def solve_cpa(scene: PrecomputedScene, config: SceneConfig) -> SchemeResult:
    """Circular polarization: f = (1/√2)[1, j], e = [1, j]"""
    return solve_fixed_polarization(scene, config, CPA_TX, CPA_RX, SchemeId.CPA)


def solve_lpa(scene: PrecomputedScene, config: SceneConfig) -> SchemeResult:
    """Linear polarization: f = [1, 0], e = [1, 0]"""
    return solve_fixed_polarization(scene, config, LPA_TX, LPA_RX, SchemeId.LPA)


# ----------------------------------------
# Discrete and real-angle rules
# ----------------------------------------

class SwitchableRule(PhaseShiftRule):
    """PRA restricted to the two circular states {π/2, 3π/2}"""

    name = "spra"

    def update_receive(self, k: np.ndarray) -> float:
        values = [float(np.real(np.vdot(pfv_rx(s), k @ pfv_rx(s)))) for s in SWITCH_STATES]
        return SWITCH_STATES[int(np.argmax(values))]

    def update_transmit(self, quad: np.ndarray, lin: np.ndarray) -> float:
        values = []
        for state in SWITCH_STATES:
            f = pfv_tx(state)
            values.append(float(np.real(np.vdot(f, quad @ f) + 2.0 * np.vdot(f, lin))))
        return SWITCH_STATES[int(np.argmax(values))]

    def initial(self, rng: np.random.Generator, n_tx: int, n_rx: int) -> Tuple[np.ndarray, np.ndarray]:
        xi, phi = initial_phases(rng, n_tx, n_rx)
        return _snap(xi), _snap(phi)


def _snap(phases: np.ndarray) -> np.ndarray:
    return np.where(phases < math.pi, SWITCH_STATES[0], SWITCH_STATES[1])


def paa_receive_angle(k: np.ndarray) -> float:
    """
    η maximizing u^T Re(K) u over u = [cos η, sin η]: top eigenvector of the
    real symmetric part, reported in [0, π).
    """
    sym = np.real(0.5 * (k + np.conj(k.T)))
    _, vecs = np.linalg.eigh(sym)
    top = vecs[:, -1]
    angle = float(np.mod(math.atan2(top[1], top[0]), math.pi))
    return 0.0 if angle >= math.pi else angle


def _paa_transmit_value(quad: np.ndarray, lin: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    c, s = np.cos(zeta), np.sin(zeta)
    return (
        quad[0, 0] * c**2 + 2.0 * quad[0, 1] * c * s + quad[1, 1] * s**2
        + 2.0 * (lin[0] * c + lin[1] * s)
    )


def paa_transmit_angle(quad: np.ndarray, lin: np.ndarray) -> float:
    """
    ζ maximizing u^T Re(A) u + 2u^T Re(b) over u = [cos ζ, sin ζ].

    The stationary points are the unit-circle roots z = e^{jζ} of a degree-4
    polynomial; every root angle is evaluated and the best is returned in
    [0, 2π).
    """
    a = np.real(0.5 * (quad + np.conj(quad.T)))
    b = np.real(lin)

    alpha = a[1, 1] - a[0, 0]
    beta = 2.0 * a[0, 1]
    g_sin = -2.0 * b[0]
    g_cos = 2.0 * b[1]
    coeffs = np.array([
        beta - 1j * alpha,
        g_cos - 1j * g_sin,
        0.0,
        g_cos + 1j * g_sin,
        beta + 1j * alpha,
    ])

    candidates = [0.0, math.pi / 2, math.pi, 3 * math.pi / 2]
    if np.any(np.abs(coeffs) > 0):
        roots = np.roots(coeffs)
        roots = roots[np.isfinite(roots) & (np.abs(roots) > 0)]
        candidates.extend(np.angle(roots).tolist())

    zeta = np.mod(np.asarray(candidates, dtype=float), TWO_PI)
    values = _paa_transmit_value(a, b, zeta)
    best = float(zeta[int(np.argmax(values))])
    return 0.0 if best >= TWO_PI else best


class AgileRule(PolarizationRule):
    """Polarization-agile antennas: f = [cos ζ, sin ζ], e = [cos η, sin η]"""

    name = "paa"

    def tx_vector(self, param: float) -> np.ndarray:
        return np.array([math.cos(param), math.sin(param)], dtype=complex)

    def rx_vector(self, param: float) -> np.ndarray:
        return np.array([math.cos(param), math.sin(param)], dtype=complex)

    def update_receive(self, k: np.ndarray) -> float:
        return paa_receive_angle(k)

    def update_transmit(self, quad: np.ndarray, lin: np.ndarray) -> float:
        return paa_transmit_angle(quad, lin)


def _alternation_result(
    scheme: SchemeId,
    rule: PolarizationRule,
    scene: PrecomputedScene,
    config: SceneConfig,
    settings: AoSettings,
) -> SchemeResult:
    best, objectives = alternate_with_restarts(scene.a1, scene.psi, config.power_w, rule, settings)
    logger.info(
        f"{scheme.value}: objective {best.objective:.10g} after {best.outer_iters} outer iteration(s), "
        f"best of {len(objectives)}"
    )
    return SchemeResult(
        scheme=scheme,
        objective=best.objective,
        bcrb=bcrb_from_objective(best.objective, scene, config),
        r_x=best.r_x,
        tx_vecs=rule.tx_vectors(best.tx_params),
        rx_vecs=rule.rx_vectors(best.rx_params),
        tx_params=best.tx_params,
        rx_params=best.rx_params,
        outer_iters=best.outer_iters,
    )


def solve_spra(scene: PrecomputedScene, config: SceneConfig, settings: AoSettings) -> SchemeResult:
    """AO with every phase in {π/2, 3π/2}"""
    return _alternation_result(SchemeId.SPRA, SwitchableRule(), scene, config, settings)


def solve_paa(scene: PrecomputedScene, config: SceneConfig, settings: AoSettings) -> SchemeResult:
    """AO over real polarization angles"""
    return _alternation_result(SchemeId.PAA, AgileRule(), scene, config, settings)


def _std_error(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(values.size))


def solve_random_phase(
    scene: PrecomputedScene,
    config: SceneConfig,
    n_draws: int,
    seed: int,
) -> SchemeResult:
    """
    Uniform random phases, R_X optimized per draw.

    Draw k uses the same generator stream (and therefore the same phases) as
    AO restart k with the same seed. The reported bcrb is the mean over draws
    of the per-draw bound.
    """
    if n_draws < 1:
        raise ValueError(f"n_draws must be >= 1, got {n_draws}")

    objectives = []
    for rng in restart_rngs(seed, n_draws):
        xi, phi = initial_phases(rng, scene.n_tx, scene.n_rx)
        q = effective_matrix(scene.a1, scene.psi, tx_pfvs(xi), rx_pfvs(phi))
        r_x, _ = optimal_covariance_for(q, config.power_w)
        objectives.append(quadratic_trace(q, r_x))

    values = np.asarray(objectives)
    bounds = np.array([bcrb_from_objective(v, scene, config) for v in values])
    logger.info(f"random_phase: mean objective {values.mean():.10g} over {n_draws} draw(s)")
    return SchemeResult(
        scheme=SchemeId.RANDOM_PHASE,
        objective=float(values.mean()),
        bcrb=float(bounds.mean()),
        # covariance of the last draw, kept for shape consistency
        r_x=r_x,
        draw_objectives=tuple(float(v) for v in values),
        objective_std_error=_std_error(values),
        bcrb_std_error=_std_error(bounds),
    )


def solve_proposed(
    scene: PrecomputedScene,
    config: SceneConfig,
    settings: AoSettings,
    warm_starts: Sequence[Design] = (),
) -> SchemeResult:
    result = run_ao(scene, config, settings, warm_starts=warm_starts)
    design = result.design
    return SchemeResult(
        scheme=SchemeId.PROPOSED_PRA,
        objective=result.objective,
        bcrb=bcrb_from_objective(result.objective, scene, config),
        r_x=design.r_x,
        tx_vecs=tx_pfvs(design.xi),
        rx_vecs=rx_pfvs(design.phi),
        tx_params=design.xi,
        rx_params=design.phi,
        outer_iters=result.outer_iters,
    )


# ----------------------------------------
# Scheme registry
# ----------------------------------------

# Schemes whose solutions are points of the PRA feasible set
WARM_START_SCHEMES = (SchemeId.SPRA, SchemeId.CPA)


class BenchmarkSuite:
    """Solves any scheme on one shared scene"""

    def __init__(
        self,
        scene: PrecomputedScene,
        config: SceneConfig,
        ao: AoSettings,
        benchmarks: BenchmarkSettings,
    ):
        self.scene = scene
        self.config = config
        self.ao = ao
        self.benchmarks = benchmarks

    def solve(self, scheme: SchemeId, warm_starts: Sequence[Design] = ()) -> SchemeResult:
        scheme = SchemeId(scheme)
        if scheme == SchemeId.PROPOSED_PRA:
            return solve_proposed(self.scene, self.config, self.ao, warm_starts)
        if scheme == SchemeId.NO_PRA:
            return solve_no_pra(self.scene, self.config, self.benchmarks)
        if scheme == SchemeId.SPRA:
            return solve_spra(self.scene, self.config, self.ao)
        if scheme == SchemeId.CPA:
            return solve_cpa(self.scene, self.config)
        if scheme == SchemeId.LPA:
            return solve_lpa(self.scene, self.config)
        if scheme == SchemeId.PAA:
            return solve_paa(self.scene, self.config, self.ao)
        return solve_random_phase(self.scene, self.config, self.benchmarks.random_draws, self.ao.rng_seed)

    def solve_all(self, schemes: Sequence[SchemeId]) -> Dict[SchemeId, SchemeResult]:
        """Sequential evaluation; the proposed scheme is solved last, warm-started"""
        results: Dict[SchemeId, SchemeResult] = {}
        for scheme in self.prerequisites(schemes):
            results[scheme] = self.solve(scheme)
        if SchemeId.PROPOSED_PRA in schemes:
            results[SchemeId.PROPOSED_PRA] = self.solve(
                SchemeId.PROPOSED_PRA, warm_starts=warm_start_designs(results)
            )
        return {scheme: results[scheme] for scheme in schemes}

    @staticmethod
    def prerequisites(schemes: Sequence[SchemeId]) -> list:
        """Non-proposed schemes to solve first, including the warm-start sources"""
        needed = [s for s in schemes if s != SchemeId.PROPOSED_PRA]
        if SchemeId.PROPOSED_PRA in schemes:
            needed.extend(s for s in WARM_START_SCHEMES if s not in needed)
        return needed


def warm_start_designs(results: Dict[SchemeId, SchemeResult]) -> list:
    designs = []
    for scheme in WARM_START_SCHEMES:
        result = results.get(scheme)
        design = result.phase_design() if result is not None else None
        if design is not None:
            designs.append(design)
    return designs
