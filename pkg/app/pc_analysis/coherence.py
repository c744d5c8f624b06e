"""
Sample spectral coherence and period detection.

For a series X_0..X_{n-1} the DFT ordinates use the positive exponent,
d(P) = sum_k X_k exp(2 pi i k P / n). The coherence of frequencies P and Q
over a window of M ordinates is

    |sum_m d(P+m) conj d(Q+m)|^2 / (sum_m |d(P+m)|^2 sum_m |d(Q+m)|^2)

with P+m and Q+m taken modulo n. A periodically correlated series with
period rho shows lines of large coherence at offsets |P - Q| = k n / rho.

Pairs are organised by offset D = (P - Q) mod n. For each D in 0..n/2 all
(or every stride-th) P are evaluated, which covers every unordered pair of
the lower triangle exactly once.

Classification scores each offset against its neighbours, sums the scores
along the harmonics of each candidate period and compares the best sum with
the same statistic on white-noise replicates of equal size.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import fft as sp_fft
from scipy import stats
from statsmodels.tsa.stattools import acf

from app.shared import settings
from app.shared.errors import ParameterError, UndefinedValueError

logger = logging.getLogger(__name__)

MIN_TESTED_OFFSETS = 8
BASELINE_HALF_WIDTH = 8
MAX_HARMONICS = 64
NULL_SEED = 1729


# ==================== REPORT TYPES ====================

@dataclass(frozen=True)
class PeriodEstimate:
    period: Optional[int]
    classification: str
    spacing: Optional[float] = None
    lines: Tuple[int, ...] = ()
    line_mass_fraction: Optional[float] = None
    off_diagonal_rate: float = 0.0
    rate_cutoff: Optional[float] = None
    line_cutoff: Optional[float] = None
    comb_score: Optional[float] = None
    comb_cutoff: Optional[float] = None


@dataclass(frozen=True)
class CoherenceReport:
    """Coherence values on the evaluated pairs plus per-offset summaries"""
    n: int
    M: int
    alpha: float
    threshold: float
    stride: int
    centered: bool
    P: np.ndarray
    Q: np.ndarray
    values: np.ndarray
    significant: np.ndarray
    offsets: np.ndarray
    offset_counts: np.ndarray
    offset_significant: np.ndarray
    offset_means: np.ndarray
    undefined_pairs: int = 0
    estimated_period: Optional[int] = None
    classification: Optional[str] = None
    estimate: Optional[PeriodEstimate] = field(default=None, repr=False)

    @property
    def significant_pairs(self) -> np.ndarray:
        """(P, Q) rows of the pairs above the threshold"""
        mask = self.significant
        return np.column_stack((self.P[mask], self.Q[mask]))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "P": self.P,
                "Q": self.Q,
                "value": self.values,
                "significant": self.significant.astype(int),
            }
        )

    def summary(self) -> dict:
        return {
            "n": self.n,
            "M": self.M,
            "alpha": self.alpha,
            "threshold": self.threshold,
            "period": self.estimated_period,
            "classification": self.classification,
        }


@dataclass(frozen=True)
class PeriodicProfile:
    """Per-phase sample mean and variance of a series folded on a period"""
    period: int
    means: np.ndarray
    variances: np.ndarray
    counts: np.ndarray


# ==================== DFT AND COHERENCE ====================

def _as_series(X, minimum: int = 2) -> np.ndarray:
    x = np.asarray(X, dtype=float).ravel()
    if x.shape[0] < minimum:
        raise ParameterError(f"series needs at least {minimum} values, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ParameterError("series contains non-finite values")
    return x


def dft_ordinates(X) -> np.ndarray:
    """d(P) = sum_k X_k e^{i k 2 pi P / n}, P = 0..n-1"""
    x = _as_series(X)
    # unscaled inverse transform has the positive exponent
    return sp_fft.ifft(x, norm="forward")


def _ordinates(X, center: bool) -> np.ndarray:
    x = _as_series(X)
    if center:
        x = x - x.mean()
    return dft_ordinates(x)


def _check_window(M: int, n: int) -> int:
    if int(M) != M or M < 2:
        raise ParameterError(f"window M must be an integer >= 2, got {M!r}")
    if M > n:
        raise ParameterError(f"window M={M} exceeds series length {n}")
    return int(M)


def _window_sums(x: np.ndarray, M: int) -> np.ndarray:
    """sum_{m<M} x[(P+m) mod n] for every P"""
    n = x.shape[0]
    extended = np.concatenate((x, x[: M - 1]))
    cumulative = np.concatenate(([0.0], np.cumsum(extended)))
    return cumulative[M : M + n] - cumulative[:n]


def coherence(X, P: int, Q: int, M: int, center: bool = True) -> float:
    """Squared sample coherence of frequencies P and Q; windows wrap modulo n"""
    d = _ordinates(X, center)
    n = d.shape[0]
    M = _check_window(M, n)
    for name, value in (("P", P), ("Q", Q)):
        if int(value) != value or not (0 <= value < n):
            raise ParameterError(f"{name} must be an integer in [0, {n}), got {value!r}")
    window = np.arange(M)
    dp = d[(int(P) + window) % n]
    dq = d[(int(Q) + window) % n]
    power_p = math.fsum(dp.real ** 2 + dp.imag ** 2)
    power_q = math.fsum(dq.real ** 2 + dq.imag ** 2)
    if power_p == 0.0 or power_q == 0.0:
        raise UndefinedValueError(f"coherence undefined at (P={P}, Q={Q}): zero spectral window")
    if P == Q:
        return 1.0
    cross = np.sum(dp * np.conj(dq))
    value = (cross.real ** 2 + cross.imag ** 2) / (power_p * power_q)
    return float(min(max(value, 0.0), 1.0))


def threshold(alpha: float, M: int) -> float:
    """x_alpha = 1 - exp(log(alpha) / (M - 1)), natural logarithm"""
    if not (0.0 < alpha < 1.0):
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")
    if int(M) != M or M < 2:
        raise ParameterError(f"window M must be an integer >= 2, got {M!r}")
    return float(-math.expm1(math.log(alpha) / (M - 1)))


def default_stride(n: int, max_pairs: Optional[int] = None) -> int:
    """Smallest stride keeping the evaluated pairs under max_pairs"""
    max_pairs = max_pairs or settings.COHERENCE_MAX_PAIRS
    total = n * (n // 2 + 1)
    return max(1, int(math.ceil(total / max_pairs)))


# ==================== PAIR GRID ====================

def _scan_offsets(d: np.ndarray, M: int, stride: int) -> Iterator[Tuple[int, np.ndarray, np.ndarray, np.ndarray, np.ndarray]]:
    """Yield (D, P, Q, values, defined) for every offset D in 0..n/2"""
    n = d.shape[0]
    power = np.maximum(_window_sums(d.real ** 2 + d.imag ** 2, M), 0.0)
    rows = np.arange(0, n, stride)
    for D in range(n // 2 + 1):
        P = rows if 2 * D != n else rows[rows >= D]
        Q = (P - D) % n
        denominator = power[P] * power[Q]
        defined = denominator > 0.0
        if D == 0:
            values = np.where(defined, 1.0, 0.0)
        else:
            cross = _window_sums(d * np.conj(np.roll(d, D)), M)[P]
            numerator = cross.real ** 2 + cross.imag ** 2
            with np.errstate(divide="ignore", invalid="ignore"):
                values = np.where(defined, numerator / np.where(defined, denominator, 1.0), 0.0)
            values = np.clip(values, 0.0, 1.0)
        yield D, P, Q, values, defined


def _offset_summary(d: np.ndarray, M: int, x_alpha: float, stride: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-offset pair counts, significant counts and mean coherence"""
    size = d.shape[0] // 2 + 1
    counts = np.zeros(size, dtype=np.int64)
    hits = np.zeros(size, dtype=np.int64)
    means = np.zeros(size)
    for D, _, _, values, defined in _scan_offsets(d, M, stride):
        counts[D] = int(np.count_nonzero(defined))
        hits[D] = int(np.count_nonzero(defined & (values > x_alpha)))
        means[D] = float(values[defined].mean()) if counts[D] else 0.0
    return counts, hits, means


def _check_stride(stride, n: int) -> int:
    if stride is None:
        return default_stride(n)
    if int(stride) != stride or stride < 1:
        raise ParameterError(f"stride must be a positive integer, got {stride!r}")
    return int(stride)


def significant_pairs(
    X,
    M: int,
    alpha: float,
    stride: Optional[int] = None,
    center: bool = True,
    estimate: bool = True,
) -> CoherenceReport:
    """
    Evaluate the coherence on the lower-triangle grid, mark values above
    threshold(alpha, M) and, unless estimate is False, classify the series.
    """
    d = _ordinates(X, center)
    n = d.shape[0]
    M = _check_window(M, n)
    x_alpha = threshold(alpha, M)
    stride = _check_stride(stride, n)

    offsets = np.arange(n // 2 + 1)
    counts = np.zeros(offsets.shape[0], dtype=np.int64)
    hits = np.zeros(offsets.shape[0], dtype=np.int64)
    means = np.zeros(offsets.shape[0])
    P_parts: List[np.ndarray] = []
    Q_parts: List[np.ndarray] = []
    value_parts: List[np.ndarray] = []
    undefined = 0

    for D, P, Q, values, defined in _scan_offsets(d, M, stride):
        undefined += int(np.count_nonzero(~defined))
        counts[D] = int(np.count_nonzero(defined))
        hits[D] = int(np.count_nonzero(defined & (values > x_alpha)))
        means[D] = float(values[defined].mean()) if counts[D] else 0.0
        P_parts.append(np.maximum(P, Q))
        Q_parts.append(np.minimum(P, Q))
        value_parts.append(values)

    if undefined:
        logger.warning("coherence undefined on %d pairs (zero spectral window)", undefined)

    values = np.concatenate(value_parts)
    report = CoherenceReport(
        n=n,
        M=M,
        alpha=float(alpha),
        threshold=x_alpha,
        stride=stride,
        centered=bool(center),
        P=np.concatenate(P_parts).astype(np.int64),
        Q=np.concatenate(Q_parts).astype(np.int64),
        values=values,
        significant=values > x_alpha,
        offsets=offsets,
        offset_counts=counts,
        offset_significant=hits,
        offset_means=means,
        undefined_pairs=undefined,
    )
    logger.debug("coherence: n=%d M=%d stride=%d pairs=%d", n, M, stride, values.shape[0])
    if not estimate:
        return report
    result = classify(report)
    return replace(report, estimated_period=result.period, classification=result.classification, estimate=result)


# ==================== LINE AND COMB SCORES ====================

def tested_offsets(n: int, tolerance: int) -> np.ndarray:
    """
    Offsets that may carry a line: at least 2 tolerance + 2 away from the
    diagonal and below n/2. Offset n/2 of an even series only holds half the
    rows, each pair twice over, and is left out.
    """
    return np.arange(2 * int(tolerance) + 2, (n - 1) // 2 + 1)


def _line_scores(means: np.ndarray, n: int, tolerance: int) -> np.ndarray:
    scores = np.full(means.shape[0], np.nan)
    tested = tested_offsets(n, tolerance)
    if tested.size < MIN_TESTED_OFFSETS:
        return scores
    profile = means[tested]
    baseline = (
        pd.Series(profile)
        .rolling(2 * BASELINE_HALF_WIDTH + 1, center=True, min_periods=1)
        .median()
        .to_numpy()
    )
    excess = profile - baseline
    scale = float(stats.median_abs_deviation(excess, scale="normal"))
    if not scale > 0.0:
        return scores
    scores[tested] = (excess - stats.trim_mean(excess, 0.1)) / scale
    return scores


def line_scores(report: CoherenceReport, tolerance: Optional[int] = None) -> np.ndarray:
    """
    Standardised excess of each offset's mean coherence over its neighbours.

    The baseline is a running median across neighbouring offsets, which
    follows the slow decay of a broadened diagonal and the uniform lift of a
    heavy-tailed series but not a narrow line. Excesses are centered by their
    trimmed mean and scaled by their MAD. Offsets outside tested_offsets are
    NaN.
    """
    tolerance = settings.PERIOD_TOLERANCE if tolerance is None else tolerance
    return _line_scores(report.offset_means, report.n, int(tolerance))


@lru_cache(maxsize=64)
def _comb_layout(n: int, tolerance: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Candidate periods with the start of their harmonic offsets in one flat index"""
    tested = tested_offsets(n, tolerance)
    periods: List[int] = []
    starts: List[int] = []
    parts: List[np.ndarray] = []
    size = 0
    if tested.size:
        low, high = int(tested[0]), int(tested[-1])
        for rho in range(2, n // low + 1):
            k = np.arange(1, min(rho // 2, MAX_HARMONICS) + 1)
            harmonics = np.rint(k * n / rho).astype(np.int64)
            harmonics = harmonics[(harmonics >= low) & (harmonics <= high)]
            if harmonics.size == 0:
                continue
            periods.append(rho)
            starts.append(size)
            parts.append(harmonics)
            size += harmonics.size
    index = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    layout = (np.asarray(periods, dtype=np.int64), np.asarray(starts, dtype=np.int64), index)
    for array in layout:
        array.flags.writeable = False
    return layout


def _comb_scores(scores: np.ndarray, n: int, tolerance: int) -> Tuple[np.ndarray, np.ndarray]:
    periods, starts, index = _comb_layout(n, tolerance)
    if periods.size == 0:
        return periods, np.zeros(0)
    sizes = np.diff(np.append(starts, index.size))
    return periods, np.add.reduceat(scores[index], starts) / np.sqrt(sizes)


def comb_scores(report: CoherenceReport, tolerance: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Candidate periods rho and their comb score.

    The comb of rho sums the line scores at the nearest offsets to k n / rho,
    k = 1..rho/2 (at most MAX_HARMONICS terms), divided by the square root of
    the number of terms.
    """
    tolerance = settings.PERIOD_TOLERANCE if tolerance is None else tolerance
    return _comb_scores(line_scores(report, tolerance), report.n, int(tolerance))


def _off_diagonal_rate(counts: np.ndarray, hits: np.ndarray) -> float:
    evaluated = int(counts[1:].sum())
    return int(hits[1:].sum()) / evaluated if evaluated else 0.0


# ==================== WHITE-NOISE CALIBRATION ====================

def _gumbel_cutoff(maxima: np.ndarray, level: float) -> float:
    finite = maxima[np.isfinite(maxima)]
    if finite.size < 2:
        return math.inf
    if np.ptp(finite) == 0.0:
        return float(finite[0])
    loc, scale = stats.gumbel_r.fit(finite)
    return float(stats.gumbel_r.isf(level, loc=loc, scale=scale))


@dataclass(frozen=True)
class NullCalibration:
    """Off-diagonal rates and score maxima over Gaussian white-noise replicates"""
    rates: np.ndarray
    line_maxima: np.ndarray
    comb_maxima: np.ndarray

    @property
    def rate(self) -> float:
        return float(self.rates.mean())

    def line_cutoff(self, level: float) -> float:
        return _gumbel_cutoff(self.line_maxima, level)

    def comb_cutoff(self, level: float) -> float:
        return _gumbel_cutoff(self.comb_maxima, level)


@lru_cache(maxsize=32)
def null_calibration(
    n: int,
    M: int,
    alpha: float,
    stride: int,
    center: bool,
    tolerance: int,
    replicates: int,
) -> NullCalibration:
    """
    Scan white-noise series of the same length, window, stride and centering.

    Wide windows reach across 0 and n/2, where d(n - P) = conj d(P) repeats
    ordinates inside one window, so the white-noise rate of significant pairs
    exceeds alpha and depends on n and M. The replicates carry that effect
    into the rate and into the Gumbel laws fitted to the largest line and
    comb scores. The replicate generator has a fixed seed.
    """
    if int(replicates) != replicates or replicates < 2:
        raise ParameterError(f"replicates must be an integer >= 2, got {replicates!r}")
    M = _check_window(M, n)
    x_alpha = threshold(alpha, M)
    rng = np.random.default_rng(NULL_SEED)
    rates = np.empty(replicates)
    line_maxima = np.full(replicates, np.nan)
    comb_maxima = np.full(replicates, np.nan)
    for r in range(replicates):
        d = _ordinates(rng.standard_normal(n), center)
        counts, hits, means = _offset_summary(d, M, x_alpha, stride)
        rates[r] = _off_diagonal_rate(counts, hits)
        scores = _line_scores(means, n, tolerance)
        if np.all(np.isnan(scores)):
            continue
        line_maxima[r] = np.nanmax(scores)
        _, comb = _comb_scores(scores, n, tolerance)
        if comb.size:
            comb_maxima[r] = comb.max()
    logger.info(
        "white-noise calibration: n=%d M=%d stride=%d replicates=%d rate=%.4f",
        n, M, stride, replicates, rates.mean(),
    )
    calibration = NullCalibration(rates=rates, line_maxima=line_maxima, comb_maxima=comb_maxima)
    for array in (rates, line_maxima, comb_maxima):
        array.flags.writeable = False
    return calibration


# ==================== PERIOD ESTIMATION ====================

def line_mass_fraction(report: CoherenceReport, spacing: float, tolerance: Optional[int] = None) -> float:
    """Share of off-diagonal significant pairs within +-tolerance of a multiple of spacing"""
    tolerance = settings.PERIOD_TOLERANCE if tolerance is None else tolerance
    if not spacing > 0.0:
        raise ParameterError(f"spacing must be positive, got {spacing!r}")
    off = report.offsets >= 1
    flagged = report.offset_significant[off]
    total = int(flagged.sum())
    if total == 0:
        return 0.0
    offsets = report.offsets[off].astype(float)
    near = np.abs(offsets - np.rint(offsets / spacing) * spacing) <= tolerance
    return float(flagged[near].sum() / total)


def classify(
    report: CoherenceReport,
    tolerance: Optional[int] = None,
    line_alpha: Optional[float] = None,
    false_positive_factor: Optional[float] = None,
    replicates: Optional[int] = None,
) -> PeriodEstimate:
    """
    Stationary, PC(rho) or nonstationary.

    The best comb wins when it clears the white-noise cutoff at level
    line_alpha; its rho is the period and n / rho the spacing. Otherwise the
    series is stationary when no single offset clears the line cutoff and
    the off-diagonal rate stays within false_positive_factor times the
    white-noise rate, and nonstationary when it does not.
    """
    tolerance = int(settings.PERIOD_TOLERANCE if tolerance is None else tolerance)
    line_alpha = settings.LINE_ALPHA if line_alpha is None else line_alpha
    false_positive_factor = settings.FALSE_POSITIVE_FACTOR if false_positive_factor is None else false_positive_factor
    replicates = settings.NULL_REPLICATES if replicates is None else replicates
    if not (0.0 < line_alpha < 1.0):
        raise ParameterError(f"line_alpha must lie in (0, 1), got {line_alpha!r}")

    null = null_calibration(report.n, report.M, report.alpha, report.stride, report.centered, tolerance, int(replicates))
    rate = _off_diagonal_rate(report.offset_counts, report.offset_significant)
    rate_cutoff = false_positive_factor * null.rate
    line_cut = null.line_cutoff(line_alpha)
    comb_cut = null.comb_cutoff(line_alpha)

    scores = _line_scores(report.offset_means, report.n, tolerance)
    with np.errstate(invalid="ignore"):
        is_line = scores > line_cut
    common = dict(
        lines=tuple(int(v) for v in report.offsets[is_line]),
        off_diagonal_rate=rate,
        rate_cutoff=rate_cutoff,
        line_cutoff=line_cut,
        comb_cutoff=comb_cut,
    )

    periods, comb = _comb_scores(scores, report.n, tolerance)
    best_score = None
    if comb.size and not np.all(np.isnan(comb)):
        best = int(np.nanargmax(comb))
        best_score = float(comb[best])
        if best_score > comb_cut:
            period = int(periods[best])
            spacing = report.n / period
            logger.info("comb score %.2f at spacing %.3f -> period %d", best_score, spacing, period)
            return PeriodEstimate(
                period=period,
                classification=f"PC({period})",
                spacing=spacing,
                line_mass_fraction=line_mass_fraction(report, spacing, tolerance),
                comb_score=best_score,
                **common,
            )

    label = "stationary" if rate <= rate_cutoff and not common["lines"] else "nonstationary"
    return PeriodEstimate(period=None, classification=label, comb_score=best_score, **common)


def estimate_period(report: CoherenceReport) -> Optional[int]:
    """rho-hat from the diagonal lines of a report, or None"""
    if report.estimate is not None:
        return report.estimate.period
    return classify(report).period


# ==================== TIME-DOMAIN STATISTICS ====================

def sample_acf(X, max_lag: int) -> np.ndarray:
    """Biased sample autocorrelation at lags 0..max_lag"""
    x = _as_series(X)
    n = x.shape[0]
    if int(max_lag) != max_lag or not (0 <= max_lag < n):
        raise ParameterError(f"max_lag must be an integer in [0, {n}), got {max_lag!r}")
    if np.ptp(x) == 0.0:
        raise UndefinedValueError("autocorrelation undefined for a constant series")
    return acf(x, nlags=int(max_lag), adjusted=False, fft=n > 1000)


def acf_band(n: int, z: float = 1.96) -> float:
    """Half-width of the white-noise confidence band"""
    return z / math.sqrt(n)


def acf_robust_band(X, max_lag: int, z: float = 1.96) -> np.ndarray:
    """
    Per-lag half-width that stays valid for uncorrelated but dependent data.

    se_k = sqrt(sum_t x_t^2 x_{t-k}^2) / sum_t x_t^2 on the centered series.
    Returns lags 0..max_lag; lag 0 has zero width.
    """
    x = _as_series(X)
    n = x.shape[0]
    if int(max_lag) != max_lag or not (0 <= max_lag < n):
        raise ParameterError(f"max_lag must be an integer in [0, {n}), got {max_lag!r}")
    x = x - x.mean()
    squares = x * x
    total = squares.sum()
    if total == 0.0:
        raise UndefinedValueError("autocorrelation undefined for a constant series")
    band = np.zeros(int(max_lag) + 1)
    for k in range(1, int(max_lag) + 1):
        band[k] = z * math.sqrt(float(np.dot(squares[k:], squares[:-k]))) / total
    return band


def periodic_profile(X, period: int) -> PeriodicProfile:
    """Mean and variance of X at each phase i mod period"""
    x = _as_series(X, minimum=1)
    if int(period) != period or period < 1:
        raise ParameterError(f"period must be a positive integer, got {period!r}")
    frame = pd.DataFrame({"phase": np.arange(x.shape[0]) % int(period), "x": x})
    grouped = frame.groupby("phase")["x"].agg(["mean", "var", "count"]).reindex(range(int(period)))
    return PeriodicProfile(
        period=int(period),
        means=grouped["mean"].to_numpy(),
        variances=grouped["var"].to_numpy(),
        counts=grouped["count"].fillna(0).to_numpy(dtype=np.int64),
    )
