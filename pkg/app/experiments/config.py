"""
Experiment files.

An experiment file is key=value text in the same format as a .env file and
is read with python-dotenv. Lists are comma separated, jump laws are written
normal(mu,sigma2) or point(c):

    tau=6.5
    lengths=0.5,2.5,3,0.5
    rates=4,10,5,30
    jump_dist=normal(2,4),normal(1.5,2.5),normal(2.5,1.5),normal(1.75,3)
    p=1
    q=3
    alpha0=1e-6
    alpha=0.005
    beta=2.1,6,0.6
    periods=30
    sample_interval=0.25
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from app.cogarch.engine import CogarchParams, samples_per_period
from app.semi_levy.distributions import parse_jump_dist_list
from app.semi_levy.process import SemiLevyConfig
from app.shared import settings
from app.shared.errors import ParameterError, ToolkitError

logger = logging.getLogger(__name__)

KNOWN_KEYS = (
    "tau", "d", "lengths", "rates", "jump_dist", "delta",
    "p", "q", "alpha0", "alpha", "beta", "y0",
    "periods", "sample_interval", "seed",
    "M", "significance", "max_lag", "stride",
)

SEED_LIMIT = 2 ** 64


# ==================== MODELS ====================

class AnalysisConfig(BaseModel):
    """Coherence and ACF settings; M has no default and must be supplied to run coherence"""
    model_config = ConfigDict(frozen=True)

    M: Optional[int] = Field(None, ge=2, description="Coherence window")
    alpha: float = Field(0.05, gt=0.0, lt=1.0, description="Significance level")
    max_lag: Optional[int] = Field(None, ge=1, description="Largest ACF lag")
    stride: Optional[int] = Field(None, ge=1, description="Row stride of the coherence grid")


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    semi_levy: SemiLevyConfig
    cogarch: CogarchParams
    periods: int = Field(..., ge=1, description="Number of periods m")
    sample_interval: float = Field(..., gt=0.0, description="Sampling interval l")
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED, ge=0, lt=SEED_LIMIT)
    analysis: AnalysisConfig = Field(default_factory=AnalysisConfig)

    @model_validator(mode="after")
    def _check_grid(self):
        samples_per_period(self.semi_levy.period_tau, self.sample_interval)
        return self

    @property
    def samples_per_period(self) -> int:
        return samples_per_period(self.semi_levy.period_tau, self.sample_interval)

    @property
    def n_samples(self) -> int:
        return self.periods * self.samples_per_period

    def with_seed(self, seed: Optional[int]) -> "ExperimentConfig":
        if seed is None:
            return self
        return self.model_copy(update={"seed": _parse_seed(seed)})


# ==================== PARSING ====================

def _parse_seed(value) -> int:
    seed = int(value)
    if not (0 <= seed < SEED_LIMIT):
        raise ParameterError(f"seed must be an unsigned 64-bit integer, got {value!r}")
    return seed


def _floats(values: Mapping[str, str], key: str) -> tuple:
    text = values.get(key)
    if text is None or not str(text).strip():
        raise ParameterError(f"missing required key '{key}'")
    try:
        return tuple(float(item) for item in str(text).split(",") if item.strip())
    except ValueError:
        raise ParameterError(f"'{key}' must be a comma separated list of numbers, got {text!r}") from None


def _scalar(values: Mapping[str, str], key: str, cast=float, default=None):
    text = values.get(key)
    if text is None or not str(text).strip():
        if default is None:
            raise ParameterError(f"missing required key '{key}'")
        return default
    try:
        return cast(str(text).strip())
    except ValueError:
        raise ParameterError(f"'{key}' has an invalid value {text!r}") from None


def _optional(values: Mapping[str, str], key: str, cast):
    text = values.get(key)
    if text is None or not str(text).strip():
        return None
    try:
        return cast(str(text).strip())
    except ValueError:
        raise ParameterError(f"'{key}' has an invalid value {text!r}") from None


def _validation_message(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item.get("loc", ()))
        parts.append(f"{location}: {item.get('msg')}" if location else str(item.get("msg")))
    return "; ".join(parts)


def parse_experiment(values: Mapping[str, Optional[str]]) -> ExperimentConfig:
    """Build an ExperimentConfig from raw key=value pairs"""
    unknown = sorted(set(values) - set(KNOWN_KEYS))
    if unknown:
        logger.warning("ignoring unknown experiment keys: %s", ", ".join(unknown))

    lengths = _floats(values, "lengths")
    rates = _floats(values, "rates")
    jump_text = values.get("jump_dist")
    if jump_text is None or not str(jump_text).strip():
        raise ParameterError("missing required key 'jump_dist'")
    jump_dists = parse_jump_dist_list(str(jump_text))
    d = _optional(values, "d", int)
    if d is not None and not (len(lengths) == len(rates) == len(jump_dists) == d):
        raise ParameterError(
            f"d={d} but got {len(lengths)} lengths, {len(rates)} rates and {len(jump_dists)} jump laws"
        )

    y0 = _optional(values, "y0", lambda text: tuple(float(v) for v in text.split(",") if v.strip()))
    try:
        return ExperimentConfig(
            semi_levy=SemiLevyConfig(
                period_tau=_scalar(values, "tau"),
                lengths=lengths,
                rates=rates,
                jump_dists=tuple(jump_dists),
                drift_delta=_scalar(values, "delta", default=0.0),
            ),
            cogarch=CogarchParams(
                p=_scalar(values, "p", int),
                q=_scalar(values, "q", int),
                alpha0=_scalar(values, "alpha0"),
                alphas=_floats(values, "alpha"),
                betas=_floats(values, "beta"),
                y0=y0,
            ),
            periods=_scalar(values, "periods", int),
            sample_interval=_scalar(values, "sample_interval"),
            seed=_parse_seed(_scalar(values, "seed", int, default=settings.DEFAULT_SEED)),
            analysis=AnalysisConfig(
                M=_optional(values, "M", int),
                alpha=_scalar(values, "significance", default=0.05),
                max_lag=_optional(values, "max_lag", int),
                stride=_optional(values, "stride", int),
            ),
        )
    except ValidationError as e:
        raise ParameterError(f"invalid experiment configuration: {_validation_message(e)}") from e


def load_experiment(path: Union[str, Path]) -> ExperimentConfig:
    """Read and validate an experiment file"""
    path = Path(path)
    if not path.is_file():
        raise ParameterError(f"experiment file not found: {path}")
    values: Dict[str, Optional[str]] = dict(dotenv_values(path))
    try:
        config = parse_experiment(values)
    except ToolkitError as e:
        raise ParameterError(f"{path}: {e}") from e
    logger.info("loaded experiment %s (hash %s)", path, config_hash(config)[:12])
    return config


def config_hash(config: BaseModel) -> str:
    """sha256 of the canonical JSON dump"""
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
