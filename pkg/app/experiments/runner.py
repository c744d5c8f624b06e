"""
Reproducible experiment runs.

Each run takes a validated ExperimentConfig, seeds one numpy Generator,
writes its data files with 17 significant digits and stamps a manifest
with the seed and the config hash. Identical config and seed give
byte-identical files.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd

from app import __version__
from app.cogarch.engine import CogarchPath, simulate_path
from app.conditions.checker import ConditionReport, check_conditions
from app.experiments.config import ExperimentConfig, config_hash
from app.experiments.series import prices_from_path, write_price_csv
from app.pc_analysis.coherence import CoherenceReport, acf_band, acf_robust_band, sample_acf, significant_pairs
from app.semi_levy.process import JumpPath, char_function, simulate_driver
from app.shared.csv_io import write_csv, write_json, write_key_values
from app.shared.errors import ParameterError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

JUMPS_FILE = "jumps.csv"
GRID_FILE = "grid.csv"
DRIVER_FILE = "driver.csv"
MANIFEST_FILE = "manifest.json"
CONDITIONS_FILE = "conditions.txt"
REPORT_FILE = "report.txt"
COHERENCE_FILE = "coherence.csv"
COHERENCE_SUMMARY_FILE = "coherence_summary.txt"
ACF_FILE = "acf.csv"
CHARFN_FILE = "charfn.csv"


# ==================== RESULTS ====================

@dataclass
class SimulationResult:
    exit_code: int
    config: ExperimentConfig
    seed: int
    jump_path: Optional[JumpPath] = None
    path: Optional[CogarchPath] = None
    report: Optional[ConditionReport] = None
    files: Dict[str, Path] = field(default_factory=dict)


@dataclass
class CheckResult:
    exit_code: int
    report: ConditionReport
    files: Dict[str, Path] = field(default_factory=dict)


@dataclass
class CoherenceResult:
    exit_code: int
    report: CoherenceReport
    files: Dict[str, Path] = field(default_factory=dict)


# ==================== FILE LAYOUT ====================

def jump_frame(path: CogarchPath) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "n": np.arange(1, path.arrivals.shape[0] + 1),
            "arrival": path.arrivals,
            "V_jump": path.v_jump,
            "G_jump": path.g_jump,
        }
    )


def grid_frame(path: CogarchPath) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "index": np.arange(path.n_samples),
            "time": path.grid_times,
            "V": path.v_grid,
            "G": path.g_grid,
        }
    )


def driver_frame(jump_path: JumpPath) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "n": np.arange(1, jump_path.size + 1),
            "arrival": jump_path.arrivals,
            "jump": jump_path.jumps,
        }
    )


def _manifest(command: str, config: ExperimentConfig, seed: int, files: Dict[str, Path], **extra) -> dict:
    payload = {
        "command": command,
        "version": __version__,
        "seed": int(seed),
        "config_hash": config_hash(config),
        "files": {name: path.name for name, path in files.items()},
    }
    payload.update(extra)
    return payload


# ==================== COMMANDS ====================

def simulate(config: ExperimentConfig, seed: Optional[int] = None):
    """Arrivals, jumps and the COGARCH path from one seeded stream"""
    seed = config.seed if seed is None else int(seed)
    rng = np.random.default_rng(seed)
    jump_path = simulate_driver(config.semi_levy, config.periods, rng)
    path = simulate_path(jump_path, config.cogarch, config.sample_interval)
    return jump_path, path


def run_simulate(
    config: ExperimentConfig,
    out_dir: Optional[PathLike] = None,
    seed: Optional[int] = None,
    require_valid: bool = False,
    report: Optional[ConditionReport] = None,
) -> SimulationResult:
    """
    Simulate and write jumps.csv, grid.csv, driver.csv and manifest.json.

    With require_valid the conditions are checked first, reusing report when
    the caller already has one for this config.
    """
    config = config.with_seed(seed)
    if require_valid:
        if report is None:
            report = check_conditions(config.semi_levy, config.cogarch)
        if not report.overall:
            logger.warning("refusing to simulate: parameters fail the condition check")
            return SimulationResult(exit_code=EXIT_CHECK_FAILED, config=config, seed=config.seed, report=report)

    jump_path, path = simulate(config)
    logger.info(
        "simulated %d jumps and %d grid samples (seed %d)", jump_path.size, path.n_samples, config.seed
    )

    files: Dict[str, Path] = {}
    if out_dir is not None:
        out = Path(out_dir)
        files["jumps"] = write_csv(jump_frame(path), out / JUMPS_FILE)
        files["grid"] = write_csv(grid_frame(path), out / GRID_FILE)
        files["driver"] = write_csv(driver_frame(jump_path), out / DRIVER_FILE)
        manifest = _manifest(
            "simulate",
            config,
            config.seed,
            files,
            n_jumps=jump_path.size,
            n_samples=path.n_samples,
            samples_per_period=path.samples_per_period,
            periods=config.periods,
        )
        files["manifest"] = write_json(manifest, out / MANIFEST_FILE)

    return SimulationResult(
        exit_code=EXIT_OK,
        config=config,
        seed=config.seed,
        jump_path=jump_path,
        path=path,
        report=report,
        files=files,
    )


def run_check(config: ExperimentConfig, out_dir: Optional[PathLike] = None) -> CheckResult:
    """Condition report; exit code 0 iff every condition holds"""
    report = check_conditions(config.semi_levy, config.cogarch)
    files: Dict[str, Path] = {}
    if out_dir is not None:
        out = Path(out_dir)
        files["conditions"] = write_key_values(report.to_key_values(), out / CONDITIONS_FILE)
        report_path = out / REPORT_FILE
        report_path.write_text(report.to_text() + "\n", encoding="utf-8")
        files["report"] = report_path
        files["manifest"] = write_json(_manifest("check", config, config.seed, files, overall=report.overall), out / MANIFEST_FILE)
    return CheckResult(exit_code=EXIT_OK if report.overall else EXIT_CHECK_FAILED, report=report, files=files)


def prepare_series(values: Sequence[float], square: bool = False, tail: Optional[int] = None) -> np.ndarray:
    """Optionally keep the last `tail` values, then optionally square"""
    x = np.asarray(values, dtype=float)
    if tail is not None:
        if tail < 2:
            raise ParameterError(f"tail must be at least 2, got {tail}")
        if tail > x.shape[0]:
            raise ParameterError(f"tail {tail} exceeds series length {x.shape[0]}")
        x = x[-tail:]
    return x * x if square else x


def run_coherence(
    values: Sequence[float],
    M: int,
    alpha: float = 0.05,
    stride: Optional[int] = None,
    square: bool = False,
    tail: Optional[int] = None,
    center: bool = True,
    out_dir: Optional[PathLike] = None,
) -> CoherenceResult:
    """Coherence report files: coherence.csv (P,Q,value,significant) and the summary"""
    series = prepare_series(values, square=square, tail=tail)
    report = significant_pairs(series, M, alpha, stride=stride, center=center)
    logger.info("coherence: n=%d M=%d classification=%s", report.n, report.M, report.classification)
    files: Dict[str, Path] = {}
    if out_dir is not None:
        out = Path(out_dir)
        files["coherence"] = write_csv(report.to_frame(), out / COHERENCE_FILE)
        files["summary"] = write_key_values(report.summary(), out / COHERENCE_SUMMARY_FILE)
    return CoherenceResult(exit_code=EXIT_OK, report=report, files=files)


def run_acf(
    values: Sequence[float],
    max_lag: int,
    square: bool = False,
    tail: Optional[int] = None,
    out_dir: Optional[PathLike] = None,
) -> pd.DataFrame:
    """lag,acf,band,robust_band table"""
    series = prepare_series(values, square=square, tail=tail)
    rho = sample_acf(series, max_lag)
    band = acf_band(series.shape[0])
    robust = acf_robust_band(series, max_lag)
    frame = pd.DataFrame({"lag": np.arange(rho.shape[0]), "acf": rho, "band": band, "robust_band": robust})
    if out_dir is not None:
        write_csv(frame, Path(out_dir) / ACF_FILE)
    return frame


def run_charfn(
    config: ExperimentConfig,
    times: Sequence[float],
    u_grid: Sequence[float],
    out_dir: Optional[PathLike] = None,
) -> pd.DataFrame:
    """E exp(iuS_t) on a (t, u) grid, for comparison with empirical estimates"""
    rows = []
    u = np.asarray(u_grid, dtype=float)
    for t in times:
        phi = np.atleast_1d(char_function(u, float(t), config.semi_levy))
        rows.append(pd.DataFrame({"t": float(t), "u": u, "re": phi.real, "im": phi.imag}))
    frame = pd.concat(rows, ignore_index=True)
    if out_dir is not None:
        write_csv(frame, Path(out_dir) / CHARFN_FILE)
    return frame


def write_fixture(
    config: ExperimentConfig,
    out_path: PathLike,
    seed: Optional[int] = None,
    p0: float = 100.0,
) -> Path:
    """Synthetic price file p = p0 exp(G) from a simulated path"""
    config = config.with_seed(seed)
    _, path = simulate(config)
    series = prices_from_path(path, p0=p0)
    out = write_price_csv(series, out_path)
    manifest = _manifest("fixture", config, config.seed, {"prices": out}, n_samples=path.n_samples, p0=p0)
    write_json(manifest, Path(out).with_suffix(".manifest.json"))
    logger.info("wrote %d prices to %s", len(series), out)
    return out
