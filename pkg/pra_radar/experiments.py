"""
Experiment Drivers
==================

Scene preparation and the three reproduction experiments built on top of
the library: AO convergence, radiated power pattern and BCRB versus received
SNR (plus the single-SNR scheme comparison).
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence

import numpy as np

from .bcrb import bcrb_from_objective
from .benchmarks import SchemeResult, solve_no_pra
from .model import PrecomputedScene, depolarization, gmm_pdf, precompute, steering, tx_pfvs
from .numerics import QuadratureRule, make_quadrature
from .optimizer import OptResult
from .schemas import ExperimentConfig, SceneConfig, SchemeId

logger = logging.getLogger(__name__)

PatternMode = Literal["transmit", "polarized"]


@dataclass(frozen=True)
class PreparedExperiment:
    """Validated experiment plus its scene, integrated once"""
    experiment: ExperimentConfig
    config: SceneConfig
    rule: QuadratureRule
    scene: PrecomputedScene


def apply_overrides(
    experiment: ExperimentConfig,
    seed: Optional[int] = None,
    restarts: Optional[int] = None,
    output_dir: Optional[Path] = None,
) -> ExperimentConfig:
    """Command-line flags take precedence over the config document"""
    ao_update = {}
    if seed is not None:
        ao_update["rng_seed"] = seed
    if restarts is not None:
        if restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {restarts}")
        ao_update["n_restarts"] = restarts

    update = {}
    if ao_update:
        update["ao"] = experiment.ao.model_copy(update=ao_update)
    if output_dir is not None:
        update["output_dir"] = Path(output_dir)
    return experiment.model_copy(update=update) if update else experiment


def prepare(experiment: ExperimentConfig) -> PreparedExperiment:
    config = experiment.scene_config()
    rule = make_quadrature(experiment.prior, experiment.quadrature_nodes)
    scene = precompute(config, experiment.prior, rule)
    return PreparedExperiment(experiment=experiment, config=config, rule=rule, scene=scene)


# ----------------------------------------
# AO convergence trace
# ----------------------------------------

@dataclass(frozen=True)
class TraceRow:
    outer_iter: int
    stage: str
    objective: float
    bcrb: float


def trace_rows(prepared: PreparedExperiment, result: OptResult) -> List[TraceRow]:
    return [
        TraceRow(
            outer_iter=entry.outer_iter,
            stage=entry.stage,
            objective=entry.objective,
            bcrb=bcrb_from_objective(entry.objective, prepared.scene, prepared.config),
        )
        for entry in result.trace
    ]


# ----------------------------------------
# Radiated power pattern
# ----------------------------------------

@dataclass(frozen=True)
class BeampatternRow:
    theta: float
    pattern: float
    prior_pdf: float
    no_pra_pattern: float


def transmit_pattern(
    config: SceneConfig,
    r_x: np.ndarray,
    thetas: np.ndarray,
    mode: PatternMode = "transmit",
    xi: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    a^H(θ) R_X a(θ) / P on a grid of angles.

    In ``polarized`` mode the pattern is scaled by the mean over transmit
    antennas of ‖Ψ f(ξ_n)‖², which needs ``xi``.
    """
    a = steering(config, np.asarray(thetas, dtype=float), "tx")
    pattern = np.real(np.einsum("tn,nk,tk->t", a.conj(), r_x, a)) / config.power_w
    pattern = np.maximum(pattern, 0.0)
    if mode == "polarized":
        if xi is None:
            raise ValueError("polarized pattern needs the transmit phases")
        radiated = tx_pfvs(xi) @ depolarization(config.xpd_inv).T
        pattern = pattern * float(np.mean(np.sum(np.abs(radiated) ** 2, axis=1)))
    elif mode != "transmit":
        raise ValueError(f"pattern mode must be 'transmit' or 'polarized', got {mode!r}")
    return pattern


def beampattern_rows(
    prepared: PreparedExperiment,
    r_x: np.ndarray,
    xi: Optional[np.ndarray] = None,
) -> List[BeampatternRow]:
    """Pattern of a design next to the prior and the unpolarized benchmark"""
    grid = prepared.experiment.beampattern_grid
    thetas = grid.thetas()
    pattern = transmit_pattern(prepared.config, r_x, thetas, grid.mode, xi)
    baseline = solve_no_pra(prepared.scene, prepared.config, prepared.experiment.benchmarks)
    no_pra = transmit_pattern(prepared.config, baseline.r_x, thetas)
    pdf = gmm_pdf(prepared.experiment.prior, thetas)
    return [
        BeampatternRow(theta=float(t), pattern=float(p), prior_pdf=float(d), no_pra_pattern=float(b))
        for t, p, d, b in zip(thetas, pattern, pdf, no_pra)
    ]


# ----------------------------------------
# BCRB versus received SNR
# ----------------------------------------

@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    scheme: str
    objective: float
    bcrb: float


def noise_power_for_snr(config: SceneConfig, gamma: float, snr_db: float) -> float:
    """σ_s² = P·L·γ / SNR with SNR = 10^(snr_db/10)"""
    return config.power_w * config.n_samples * gamma / 10.0 ** (snr_db / 10.0)


def received_snr_db(config: SceneConfig, gamma: float) -> float:
    return 10.0 * math.log10(config.power_w * config.n_samples * gamma / config.noise_power_w)


def sweep_rows(
    prepared: PreparedExperiment,
    results: Dict[SchemeId, SchemeResult],
    schemes: Sequence[SchemeId],
) -> List[SweepRow]:
    """
    Bounds of already optimized schemes at every configured SNR.

    Rows are ordered by SNR, then by the configured scheme order.
    """
    rows = []
    for snr_db in sorted(prepared.experiment.snr_sweep):
        config = prepared.config.with_noise_power(noise_power_for_snr(prepared.config, prepared.scene.gamma, snr_db))
        for scheme in schemes:
            result = results[scheme]
            rows.append(SweepRow(
                snr_db=float(snr_db),
                scheme=scheme.value,
                objective=result.objective,
                bcrb=result.bcrb_at(prepared.scene, config),
            ))
    return rows


@dataclass(frozen=True)
class CompareRow:
    scheme: str
    objective: float
    bcrb: float
    objective_std_error: float
    bcrb_std_error: float
    outer_iters: int


def compare_rows(results: Dict[SchemeId, SchemeResult], schemes: Sequence[SchemeId]) -> List[CompareRow]:
    return [
        CompareRow(
            scheme=scheme.value,
            objective=results[scheme].objective,
            bcrb=results[scheme].bcrb,
            objective_std_error=results[scheme].objective_std_error,
            bcrb_std_error=results[scheme].bcrb_std_error,
            outer_iters=results[scheme].outer_iters,
        )
        for scheme in schemes
    ]
