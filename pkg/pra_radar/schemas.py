"""
Configuration Schemas
=====================

Pydantic models for everything that is read from a config document or an
HTTP request body: scene, prior, AO settings and the experiment envelope.

Power values enter the JSON documents in dBm and are converted to watts when
the physical ``SceneConfig`` is built.
"""

import json
import math
from enum import Enum
from pathlib import Path
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    if watts <= 0:
        raise ValueError(f"power must be positive to convert to dBm, got {watts}")
    return 10.0 * math.log10(watts) + 30.0


class SchemeId(str, Enum):
    """Transceiver designs compared in the BCRB experiments"""
    PROPOSED_PRA = "proposed_pra"
    NO_PRA = "no_pra"
    SPRA = "spra"
    CPA = "cpa"
    LPA = "lpa"
    PAA = "paa"
    RANDOM_PHASE = "random_phase"


ALL_SCHEMES = list(SchemeId)


class SceneConfig(BaseModel):
    """
    Physical scene in SI units.

    Attributes:
        n_tx: Number of transmit PRAs (N)
        n_rx: Number of receive PRAs (M)
        spacing_ratio: Antenna spacing over wavelength (d/λ)
        n_samples: Number of probing samples (L)
        power_w: Total transmit power budget P in watts
        noise_power_w: Receiver noise power σ_s² in watts
        xpd_inv: Inverse cross-polarization discrimination χ
    """
    n_tx: int = Field(ge=1)
    n_rx: int = Field(ge=1)
    spacing_ratio: float = Field(gt=0)
    n_samples: int = Field(ge=1)
    power_w: float = Field(gt=0)
    noise_power_w: float = Field(gt=0)
    xpd_inv: float = Field(ge=0)

    model_config = ConfigDict(frozen=True)

    @field_validator("spacing_ratio", "power_w", "noise_power_w", "xpd_inv")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    def with_noise_power(self, noise_power_w: float) -> "SceneConfig":
        return self.model_copy(update={"noise_power_w": noise_power_w})


class GaussianComponent(BaseModel):
    weight: float = Field(gt=0)
    mean: float
    variance: float = Field(gt=0)

    model_config = ConfigDict(frozen=True)


class PriorModel(BaseModel):
    """
    Gaussian-mixture prior on the target angle plus the reflection
    coefficient model α ~ CN(0, 2·alpha_var).
    """
    components: List[GaussianComponent] = Field(min_length=1)
    alpha_var: float = Field(gt=0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _weights_sum_to_one(self) -> "PriorModel":
        total = sum(c.weight for c in self.components)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"mixture weights must sum to 1, got {total!r}")
        return self

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    @property
    def means(self) -> np.ndarray:
        return np.array([c.mean for c in self.components])

    @property
    def variances(self) -> np.ndarray:
        return np.array([c.variance for c in self.components])


class AoSettings(BaseModel):
    rel_tol: float = Field(default=1e-9, gt=0)
    max_outer_iter: int = Field(default=200, ge=1)
    n_restarts: int = Field(default=8, ge=1)
    rng_seed: int = 0

    model_config = ConfigDict(frozen=True)


class BenchmarkSettings(BaseModel):
    random_draws: int = Field(default=100, ge=1)
    # no_pra with the depolarization loss 1/sqrt(1+χ) instead of unit gain
    no_pra_depolarization: bool = False

    model_config = ConfigDict(frozen=True)


class BeampatternGrid(BaseModel):
    theta_min: float = 0.0
    theta_max: float = math.pi
    n_points: int = Field(default=721, ge=2)
    mode: Literal["transmit", "polarized"] = "transmit"

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _ordered(self) -> "BeampatternGrid":
        if not self.theta_max > self.theta_min:
            raise ValueError("theta_max must be greater than theta_min")
        return self

    def thetas(self) -> np.ndarray:
        return np.linspace(self.theta_min, self.theta_max, self.n_points)


class VerifySettings(BaseModel):
    """Sizes of the oracle cross-checks run by the verify command"""
    n_mc: int = Field(default=200_000, ge=1)
    fd_step: float = Field(default=1e-5, gt=0)
    n_grid: int = Field(default=4096, ge=2)
    n_random_kernels: int = Field(default=100, ge=1)
    n_covariance_draws: int = Field(default=1000, ge=1)
    n_identity_designs: int = Field(default=50, ge=1)
    mc_rel_tol: float = Field(default=0.05, gt=0)
    seed: int = 7

    model_config = ConfigDict(frozen=True)


class SceneSettings(BaseModel):
    """Scene block of the config document (powers in dBm)"""
    n_tx: int = Field(default=12, ge=1)
    n_rx: int = Field(default=12, ge=1)
    spacing_ratio: float = Field(default=0.5, gt=0)
    n_samples: int = Field(default=25, ge=1)
    power_dbm: float = 30.0
    noise_power_dbm: float = -80.0
    xpd_inv: float = Field(default=0.2, ge=0)

    model_config = ConfigDict(frozen=True)

    def to_scene_config(self) -> SceneConfig:
        return SceneConfig(
            n_tx=self.n_tx,
            n_rx=self.n_rx,
            spacing_ratio=self.spacing_ratio,
            n_samples=self.n_samples,
            power_w=dbm_to_watts(self.power_dbm),
            noise_power_w=dbm_to_watts(self.noise_power_dbm),
            xpd_inv=self.xpd_inv,
        )


def _reference_prior() -> PriorModel:
    return PriorModel(
        components=[
            GaussianComponent(weight=0.2, mean=0.3, variance=1e-2),
            GaussianComponent(weight=0.6, mean=1.2, variance=1e-2),
            GaussianComponent(weight=0.1, mean=2.5, variance=1e-2),
            GaussianComponent(weight=0.1, mean=2.9, variance=1e-2),
        ],
        alpha_var=1e-12,
    )


class ExperimentConfig(BaseModel):
    """Complete experiment document; defaults reproduce the reference 12x12 scene"""
    scene: SceneSettings = Field(default_factory=SceneSettings)
    prior: PriorModel = Field(default_factory=_reference_prior)
    ao: AoSettings = Field(default_factory=AoSettings)
    benchmarks: BenchmarkSettings = Field(default_factory=BenchmarkSettings)
    schemes: List[SchemeId] = Field(default_factory=lambda: list(ALL_SCHEMES), min_length=1)
    snr_sweep: List[float] = Field(default_factory=lambda: [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0])
    beampattern_grid: BeampatternGrid = Field(default_factory=BeampatternGrid)
    verify: VerifySettings = Field(default_factory=VerifySettings)
    quadrature_nodes: int = Field(default=64, ge=2)
    output_dir: Optional[Path] = None

    model_config = ConfigDict(frozen=True)

    @field_validator("schemes")
    @classmethod
    def _unique_schemes(cls, value: List[SchemeId]) -> List[SchemeId]:
        # Reihenfolge beibehalten, Duplikate entfernen
        return list(dict.fromkeys(value))

    @classmethod
    def from_file(cls, path: Path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
        return cls.model_validate(payload)

    def scene_config(self) -> SceneConfig:
        return self.scene.to_scene_config()


# ----------------------------------------
# HTTP response bodies
# ----------------------------------------

class OptimizeResponse(BaseModel):
    objective: float
    bcrb: float
    prior_only_bcrb: float
    received_snr_db: float
    xi: List[float]
    phi: List[float]
    outer_iters: int
    termination: str
    degenerate: bool
    restart_objectives: List[float]


class SchemeSummary(BaseModel):
    scheme: SchemeId
    objective: float
    bcrb: float
    objective_std_error: float = 0.0
    bcrb_std_error: float = 0.0
    outer_iters: int = 0


class CompareResponse(BaseModel):
    received_snr_db: float
    prior_only_bcrb: float
    schemes: List[SchemeSummary]


class BeampatternResponse(BaseModel):
    mode: str
    theta: List[float]
    pattern: List[float]
    prior_pdf: List[float]
    no_pra_pattern: List[float]
