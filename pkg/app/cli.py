"""
Command-line surface.

    python -m app.cli simulate  --config experiments/seasonal_intensity.env --out output/seasonal
    python -m app.cli check     --config experiments/seasonal_intensity.env
    python -m app.cli coherence --input output/seasonal/grid.csv --M 240
    python -m app.cli acf       --input output/seasonal/grid.csv --max-lag 104 --square
    python -m app.cli charfn    --config experiments/seasonal_intensity.env --t 1 6.5 9
    python -m app.cli fixture   --config experiments/zero_mean_intraday.env --out fixtures/intraday_prices.csv

Exit codes: 0 success, 1 condition check failed, 2 usage or input error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from app.cogarch.engine import increments
from app.experiments import runner
from app.experiments.config import ExperimentConfig, load_experiment
from app.experiments.series import SERIES_KINDS, load_series
from app.shared import settings
from app.shared.errors import ParameterError, ToolkitError

logger = logging.getLogger("app.cli")


# ==================== ARGUMENTS ====================

def _common(parser: argparse.ArgumentParser, config_required: bool = True) -> None:
    parser.add_argument("--config", type=Path, required=config_required, help="Experiment file (key=value)")
    parser.add_argument("--seed", type=int, default=None, help="Override the experiment seed")
    parser.add_argument("--out", type=Path, default=None, help="Output directory")


def _series_source(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", type=Path, default=None, help="Series CSV (prices, grid file or value column)")
    parser.add_argument("--kind", choices=SERIES_KINDS, default="auto", help="How to read --input")
    parser.add_argument("--column", default=None, help="Column of --input to analyse")
    parser.add_argument("--square", action="store_true", help="Square the series first")
    parser.add_argument("--tail", type=int, default=None, help="Analyse only the last K samples")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m app.cli", description="Semi-Lévy COGARCH toolkit")
    parser.add_argument("--log-level", default=None, help="Overrides LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="Simulate a path and write jump/grid CSVs")
    _common(simulate)
    simulate.add_argument("--require-valid", action="store_true", help="Refuse to simulate unless every condition holds")

    check = commands.add_parser("check", help="Stationarity and non-negativity report")
    _common(check)

    coherence = commands.add_parser("coherence", help="Spectral coherence report")
    _common(coherence, config_required=False)
    _series_source(coherence)
    coherence.add_argument("--M", type=int, default=None, help="Coherence window")
    coherence.add_argument("--alpha", type=float, default=None, help="Significance level")
    coherence.add_argument("--stride", type=int, default=None, help="Row stride of the pair grid")
    coherence.add_argument("--no-center", action="store_true", help="Do not subtract the mean before the DFT")

    acf = commands.add_parser("acf", help="Sample autocorrelation")
    _common(acf, config_required=False)
    _series_source(acf)
    acf.add_argument("--max-lag", type=int, default=None, help="Largest lag (default 4 periods)")

    charfn = commands.add_parser("charfn", help="Characteristic function on a u grid")
    _common(charfn)
    charfn.add_argument("--t", type=float, nargs="+", required=True, help="Times of the marginals")
    charfn.add_argument("--u-min", type=float, default=-2.0)
    charfn.add_argument("--u-max", type=float, default=2.0)
    charfn.add_argument("--u-step", type=float, default=0.5)

    fixture = commands.add_parser("fixture", help="Write a synthetic price CSV from a simulated path")
    _common(fixture)
    fixture.add_argument("--p0", type=float, default=100.0, help="Initial price")
    return parser


# ==================== COMMAND HANDLERS ====================

def _output_dir(args, command: str) -> Path:
    return args.out if args.out is not None else Path(settings.OUTPUT_DIR) / command


def _load_config(args) -> Optional[ExperimentConfig]:
    if args.config is None:
        return None
    return load_experiment(args.config).with_seed(args.seed)


def _series(args, config: Optional[ExperimentConfig]) -> np.ndarray:
    if args.input is not None:
        return load_series(args.input, kind=args.kind, column=args.column)
    if config is None:
        raise ParameterError("give --input or --config")
    _, path = runner.simulate(config)
    return increments(path)


def cmd_simulate(args) -> int:
    config = _load_config(args)
    out = _output_dir(args, "simulate")
    result = runner.run_simulate(config, out_dir=out, require_valid=args.require_valid)
    if result.exit_code != runner.EXIT_OK:
        print(result.report.to_text())
        return result.exit_code
    print(f"{result.path.n_samples} grid samples, {result.jump_path.size} jumps -> {out}")
    return runner.EXIT_OK


def cmd_check(args) -> int:
    config = _load_config(args)
    result = runner.run_check(config, out_dir=args.out)
    print(result.report.to_text())
    return result.exit_code


def cmd_coherence(args) -> int:
    config = _load_config(args)
    M = args.M if args.M is not None else (config.analysis.M if config else None)
    if M is None:
        raise ParameterError("the coherence window is required (--M or M in the config)")
    alpha = args.alpha if args.alpha is not None else (config.analysis.alpha if config else 0.05)
    stride = args.stride if args.stride is not None else (config.analysis.stride if config else None)
    result = runner.run_coherence(
        _series(args, config),
        M,
        alpha,
        stride=stride,
        square=args.square,
        tail=args.tail,
        center=not args.no_center,
        out_dir=_output_dir(args, "coherence"),
    )
    for key, value in result.report.summary().items():
        print(f"{key}={value}")
    return result.exit_code


def cmd_acf(args) -> int:
    config = _load_config(args)
    max_lag = args.max_lag
    if max_lag is None and config is not None:
        max_lag = config.analysis.max_lag or 4 * config.samples_per_period
    if max_lag is None:
        raise ParameterError("--max-lag is required without --config")
    frame = runner.run_acf(
        _series(args, config), max_lag, square=args.square, tail=args.tail, out_dir=_output_dir(args, "acf")
    )
    outside = int((frame["acf"].abs() > frame["band"]).iloc[1:].sum())
    print(f"{len(frame) - 1} lags, {outside} outside the +-{frame['band'].iloc[0]:.4g} band")
    return runner.EXIT_OK


def cmd_charfn(args) -> int:
    config = _load_config(args)
    if not (args.u_step > 0.0) or args.u_max < args.u_min:
        raise ParameterError("need u-step > 0 and u-max >= u-min")
    count = int(round((args.u_max - args.u_min) / args.u_step)) + 1
    u_grid = args.u_min + args.u_step * np.arange(count)
    frame = runner.run_charfn(config, args.t, u_grid, out_dir=_output_dir(args, "charfn"))
    print(frame.to_string(index=False))
    return runner.EXIT_OK


def cmd_fixture(args) -> int:
    config = _load_config(args)
    out = args.out if args.out is not None else Path(settings.OUTPUT_DIR) / "fixture" / "prices.csv"
    runner.write_fixture(config, out, p0=args.p0)
    print(f"wrote {out}")
    return runner.EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "check": cmd_check,
    "coherence": cmd_coherence,
    "acf": cmd_acf,
    "charfn": cmd_charfn,
    "fixture": cmd_fixture,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings.configure_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except ToolkitError as e:
        logger.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return runner.EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
