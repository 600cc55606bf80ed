from pathlib import Path

import numpy as np
import pytest

from pra_radar.experiments import prepare
from pra_radar.model import PrecomputedScene, depolarization
from pra_radar.schemas import ExperimentConfig, SceneConfig

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"
REFERENCE_CONFIG = CONFIG_DIR / "paper_sec6.json"
VERIFY_CONFIG = CONFIG_DIR / "verify_small.json"


def random_complex(rng: np.random.Generator, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def synthetic_scene(
    rng: np.random.Generator,
    n_rx: int,
    n_tx: int,
    xpd_inv: float = 0.2,
    a1: np.ndarray = None,
) -> PrecomputedScene:
    """Scene with random prior-averaged matrices, no integration involved"""
    return PrecomputedScene(
        a1=random_complex(rng, n_rx, n_tx) if a1 is None else np.asarray(a1, dtype=complex),
        a2=random_complex(rng, n_rx, n_tx),
        psi=depolarization(xpd_inv),
        gamma=1.0,
        prior_fi=100.0,
    )


def scene_config(n_tx: int, n_rx: int, xpd_inv: float = 0.2, power_w: float = 1.0, noise_power_w: float = 1.0) -> SceneConfig:
    return SceneConfig(
        n_tx=n_tx,
        n_rx=n_rx,
        spacing_ratio=0.5,
        n_samples=2,
        power_w=power_w,
        noise_power_w=noise_power_w,
        xpd_inv=xpd_inv,
    )


def assert_nondecreasing(values, rel_slack: float = 1e-12):
    for prev, cur in zip(values[:-1], values[1:]):
        assert cur >= prev - rel_slack * max(1.0, abs(prev)), f"objective dropped from {prev!r} to {cur!r}"


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def reference_experiment() -> ExperimentConfig:
    return ExperimentConfig.from_file(REFERENCE_CONFIG)


@pytest.fixture(scope="session")
def reference_prepared(reference_experiment):
    return prepare(reference_experiment)


@pytest.fixture(scope="session")
def verify_experiment() -> ExperimentConfig:
    return ExperimentConfig.from_file(VERIFY_CONFIG)


@pytest.fixture(scope="session")
def verify_prepared(verify_experiment):
    return prepare(verify_experiment)


@pytest.fixture(scope="session")
def quick_verify_prepared(verify_experiment):
    """Verify instance with fewer draws so the full check list stays fast"""
    verify = verify_experiment.verify.model_copy(
        update={"n_mc": 40_000, "n_random_kernels": 20, "n_covariance_draws": 100, "n_identity_designs": 10}
    )
    return prepare(verify_experiment.model_copy(update={"verify": verify}))
