"""
Shared fixtures: the two experiment parameterizations, a degenerate-jump
driver and seeded generators.
"""

from pathlib import Path

import numpy as np
import pytest

from app.cogarch.engine import CogarchParams
from app.experiments.config import load_experiment
from app.semi_levy.distributions import NormalJump, PointMassJump
from app.semi_levy.process import SemiLevyConfig

ROOT = Path(__file__).resolve().parent.parent
EXPERIMENTS = ROOT / "experiments"
SEASONAL_FILE = EXPERIMENTS / "seasonal_intensity.env"
ZERO_MEAN_FILE = EXPERIMENTS / "zero_mean_intraday.env"


@pytest.fixture
def seasonal_cfg() -> SemiLevyConfig:
    return SemiLevyConfig(
        period_tau=6.5,
        lengths=(0.5, 2.5, 3.0, 0.5),
        rates=(4.0, 10.0, 5.0, 30.0),
        jump_dists=(
            NormalJump(mu=2.0, sigma2=4.0),
            NormalJump(mu=1.5, sigma2=2.5),
            NormalJump(mu=2.5, sigma2=1.5),
            NormalJump(mu=1.75, sigma2=3.0),
        ),
        drift_delta=0.0,
    )


@pytest.fixture
def seasonal_params() -> CogarchParams:
    return CogarchParams(
        p=1,
        q=3,
        alpha0=1e-6,
        alphas=(0.005,),
        betas=(2.1, 6.0, 0.6),
        y0=(0.37e-3, 0.05e-3, 0.19e-3),
    )


@pytest.fixture
def zero_mean_cfg() -> SemiLevyConfig:
    return SemiLevyConfig(
        period_tau=6.5,
        lengths=(0.5, 2.5, 3.0, 0.5),
        rates=(4.0, 10.0, 5.0, 30.0),
        jump_dists=(
            NormalJump(mu=0.0, sigma2=4.0),
            NormalJump(mu=0.0, sigma2=2.5),
            NormalJump(mu=0.0, sigma2=1.5),
            NormalJump(mu=0.0, sigma2=3.0),
        ),
        drift_delta=0.0,
    )


@pytest.fixture
def zero_mean_params() -> CogarchParams:
    return CogarchParams(
        p=1,
        q=3,
        alpha0=0.8e-6,
        alphas=(0.0275,),
        betas=(2.1, 6.0, 0.6),
        y0=(0.37e-3, 0.05e-3, 0.19e-3),
    )


@pytest.fixture
def point_cfg() -> SemiLevyConfig:
    """Two phases with degenerate jumps and a drift"""
    return SemiLevyConfig(
        period_tau=2.0,
        lengths=(0.5, 1.5),
        rates=(2.0, 1.0),
        jump_dists=(PointMassJump(value=1.0), PointMassJump(value=-0.5)),
        drift_delta=0.3,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def seasonal_experiment():
    return load_experiment(SEASONAL_FILE)


@pytest.fixture
def zero_mean_experiment():
    return load_experiment(ZERO_MEAN_FILE)
