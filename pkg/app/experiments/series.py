"""
Price and return series ingestion.

Timestamps are decimal time units in the model's abstract time; calendar
parsing is not attempted. A series file is a CSV with a header row:

    time,price     prices, analysed as log returns
    ...,G          a simulated grid file, analysed as increments of G
    value          any other single series, analysed as given
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from app.cogarch.engine import CogarchPath
from app.shared.csv_io import read_numeric_csv, write_csv
from app.shared.errors import DataError

logger = logging.getLogger(__name__)

SERIES_KINDS = ("auto", "price", "increments", "value")


@dataclass(frozen=True)
class PriceSeries:
    timestamps: np.ndarray
    prices: np.ndarray
    samples_per_period: Optional[int] = None

    def __post_init__(self):
        if self.timestamps.shape != self.prices.shape:
            raise DataError("timestamps and prices must have the same length")
        steps = np.diff(self.timestamps)
        if steps.size and np.any(steps <= 0.0):
            row = int(np.flatnonzero(steps <= 0.0)[0]) + 1
            raise DataError(f"timestamps must be strictly increasing (row {row})")

    def __len__(self) -> int:
        return int(self.prices.shape[0])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"time": self.timestamps, "price": self.prices})


def log_returns(series: PriceSeries) -> np.ndarray:
    """ln(p_{k+1} / p_k), one shorter than the series"""
    prices = np.asarray(series.prices, dtype=float)
    if prices.shape[0] < 2:
        raise DataError("log returns need at least 2 prices")
    bad = np.flatnonzero(~(prices > 0.0))
    if bad.size:
        row = int(bad[0])
        raise DataError(f"non-positive price {prices[row]!r} at row {row}")
    return np.diff(np.log(prices))


def prices_from_path(path: CogarchPath, p0: float = 100.0, samples_per_period: Optional[int] = None) -> PriceSeries:
    """p = p0 exp(G) on the sampling grid"""
    if not (p0 > 0.0):
        raise DataError(f"initial price must be positive, got {p0!r}")
    return PriceSeries(
        timestamps=np.asarray(path.grid_times, dtype=float),
        prices=p0 * np.exp(path.g_grid),
        samples_per_period=samples_per_period or path.samples_per_period,
    )


def read_price_csv(path: Union[str, Path], samples_per_period: Optional[int] = None) -> PriceSeries:
    frame = read_numeric_csv(path, required=("time", "price"))
    prices = frame["price"].to_numpy()
    bad = np.flatnonzero(~(prices > 0.0))
    if bad.size:
        raise DataError(f"{path}: non-positive price {prices[bad[0]]!r}", line=int(bad[0]) + 2)
    times = frame["time"].to_numpy()
    steps = np.flatnonzero(np.diff(times) <= 0.0)
    if steps.size:
        raise DataError(f"{path}: timestamps must be strictly increasing", line=int(steps[0]) + 3)
    return PriceSeries(timestamps=times, prices=prices, samples_per_period=samples_per_period)


def write_price_csv(series: PriceSeries, path: Union[str, Path]) -> Path:
    return write_csv(series.to_frame(), path)


def load_series(path: Union[str, Path], kind: str = "auto", column: Optional[str] = None) -> np.ndarray:
    """
    Read the series to analyse from a CSV.

    kind "price" gives log returns of the price column, "increments" the
    first differences of G (or of column), "value" the column as given.
    "auto" picks price, then G, then value, then the last column.
    """
    if kind not in SERIES_KINDS:
        raise DataError(f"unknown series kind {kind!r}; use one of {SERIES_KINDS}")
    frame = read_numeric_csv(path)
    if kind == "auto":
        if column is not None:
            kind = "value"
        elif "price" in frame.columns:
            kind = "price"
        elif "G" in frame.columns:
            kind = "increments"
        else:
            kind = "value"

    if kind == "price":
        return log_returns(read_price_csv(path))
    if kind == "increments":
        name = column or "G"
        if name not in frame.columns:
            raise DataError(f"{path}: missing column '{name}'", line=1)
        return np.diff(frame[name].to_numpy())
    name = column or ("value" if "value" in frame.columns else frame.columns[-1])
    if name not in frame.columns:
        raise DataError(f"{path}: missing column '{name}'", line=1)
    logger.debug("loaded %d values from %s column %s", len(frame), path, name)
    return frame[name].to_numpy()
