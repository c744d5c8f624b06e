"""
Semi-Lévy compound Poisson process.

The driving process is S_t = delta*t + sum_{n<=N(t)} Z_n where N is a
Poisson process whose intensity is constant on each interval
A_j = (s_{j-1}, s_j] of a partition of the period (0, tau], repeated every
period, and the jump Z_n is drawn from F_j when its arrival falls in a copy
of A_j.

Intervals are half-open on the left: t = s_j belongs to A_j, and t = 0 is
assigned to A_1. At a period boundary t = k*tau (k >= 1) the phase is
reported as r = d, m = k - 1.

RNG order (bit-reproducible per seed):
  1. one Poisson draw per interval, all m*d intervals in a single call;
  2. one uniform per arrival, in interval order, in a single call;
  3. jump sizes partition by partition (j = 1..d), each partition in a
     single call, assigned to its arrivals in ascending time.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import integrate

from app.semi_levy.distributions import JumpDistribution, NormalJump
from app.shared.errors import DomainError, ParameterError

logger = logging.getLogger(__name__)

LENGTH_SUM_RTOL = 1e-12


# ==================== DOMAIN TYPES ====================

class SemiLevyConfig(BaseModel):
    """Full law of the driving process"""
    model_config = ConfigDict(frozen=True)

    period_tau: float = Field(..., gt=0.0, description="Period length tau")
    lengths: Tuple[float, ...] = Field(..., min_length=1, description="Partition lengths l_1..l_d")
    rates: Tuple[float, ...] = Field(..., min_length=1, description="Poisson rates lambda_1..lambda_d")
    jump_dists: Tuple[JumpDistribution, ...] = Field(..., min_length=1, description="Jump laws F_1..F_d")
    drift_delta: float = Field(0.0, description="Drift delta")

    @model_validator(mode="after")
    def _check_partition(self):
        d = len(self.lengths)
        if len(self.rates) != d or len(self.jump_dists) != d:
            raise ValueError(
                f"lengths, rates and jump_dists must have the same size d "
                f"(got {d}, {len(self.rates)}, {len(self.jump_dists)})"
            )
        if any(not (length > 0.0) for length in self.lengths):
            raise ValueError("all partition lengths must be positive")
        if any(not (rate >= 0.0) for rate in self.rates):
            raise ValueError("all rates must be non-negative")
        total = math.fsum(self.lengths)
        if abs(total - self.period_tau) > LENGTH_SUM_RTOL * self.period_tau:
            raise ValueError(f"partition lengths sum to {total!r}, expected tau={self.period_tau!r}")
        return self

    @property
    def d(self) -> int:
        return len(self.lengths)

    @property
    def boundaries(self) -> np.ndarray:
        """s_0 = 0 < s_1 < ... < s_d = tau within the first period"""
        s = np.concatenate(([0.0], np.cumsum(self.lengths)))
        s[-1] = self.period_tau
        return s

    @property
    def period_masses(self) -> np.ndarray:
        """lambda_j * l_j for each partition"""
        return np.asarray(self.rates) * np.asarray(self.lengths)

    @property
    def mass_per_period(self) -> float:
        """Lambda(tau) = sum_j lambda_j l_j"""
        return float(math.fsum(self.period_masses))


@dataclass(frozen=True)
class PhaseLocation:
    """Completed periods m, partition index r (1-based), left endpoint s_prev"""
    m: int
    r: int
    s_prev: float


@dataclass(frozen=True)
class JumpPath:
    """Arrival times and jump sizes of one simulated path over (0, horizon]"""
    arrivals: np.ndarray
    jumps: Optional[np.ndarray]
    horizon: float
    config: SemiLevyConfig

    def __post_init__(self):
        self.arrivals.setflags(write=False)
        if self.jumps is not None:
            if self.jumps.shape != self.arrivals.shape:
                raise ParameterError("jumps and arrivals must have the same length")
            self.jumps.setflags(write=False)

    @property
    def size(self) -> int:
        return int(self.arrivals.shape[0])

    def with_jumps(self, jumps: np.ndarray) -> "JumpPath":
        return JumpPath(arrivals=self.arrivals, jumps=np.asarray(jumps, dtype=float), horizon=self.horizon, config=self.config)


# ==================== PHASE LOOKUP ====================

def _check_time(t: float) -> float:
    t = float(t)
    if not (t >= 0.0) or math.isinf(t):
        raise DomainError(f"time must be a finite non-negative number, got {t!r}")
    return t


def locate_phase(t: float, cfg: SemiLevyConfig) -> PhaseLocation:
    """
    Find m and r with t in A_{r+md} = (s_prev, s_prev + l_r].

    t = 0 maps to (m=0, r=1, s_prev=0); t = k*tau maps to (k-1, d).
    """
    t = _check_time(t)
    tau = cfg.period_tau
    if t == 0.0:
        return PhaseLocation(m=0, r=1, s_prev=0.0)

    m = int(math.floor(t / tau))
    u = t - m * tau
    if u <= 0.0:
        m -= 1
        u = t - m * tau
    u = min(u, tau)

    bounds = cfg.boundaries
    r = int(np.searchsorted(bounds[1:], u, side="left")) + 1
    r = min(max(r, 1), cfg.d)
    return PhaseLocation(m=m, r=r, s_prev=m * tau + float(bounds[r - 1]))


def partition_index(times: np.ndarray, cfg: SemiLevyConfig) -> np.ndarray:
    """Vectorised 1-based partition index of each time (same conventions as locate_phase)"""
    times = np.asarray(times, dtype=float)
    if times.size and (np.any(times < 0.0) or not np.all(np.isfinite(times))):
        raise DomainError("times must be finite and non-negative")
    tau = cfg.period_tau
    m = np.floor(times / tau)
    u = times - m * tau
    at_boundary = (u <= 0.0) & (times > 0.0)
    u = np.where(at_boundary, tau, u)
    u = np.minimum(u, tau)
    r = np.searchsorted(cfg.boundaries[1:], u, side="left") + 1
    return np.clip(r, 1, cfg.d)


# ==================== INTENSITY ====================

def intensity(t: float, cfg: SemiLevyConfig) -> float:
    """lambda(t) = sum_j lambda_j I_{D_j}(t)"""
    return float(cfg.rates[locate_phase(t, cfg).r - 1])


def cumulative_intensity(t: float, cfg: SemiLevyConfig) -> float:
    """Lambda(t) = integral of lambda over (0, t], exact for the piecewise-constant rate"""
    t = _check_time(t)
    if t == 0.0:
        return 0.0
    phase = locate_phase(t, cfg)
    masses = cfg.period_masses
    completed = math.fsum(masses[: phase.r - 1])
    partial = cfg.rates[phase.r - 1] * (t - phase.s_prev)
    return phase.m * cfg.mass_per_period + completed + partial


def jump_distribution(t: float, cfg: SemiLevyConfig):
    """F_j for the partition containing t"""
    return cfg.jump_dists[locate_phase(t, cfg).r - 1]


# ==================== SIMULATION ====================

def interval_grid(cfg: SemiLevyConfig, periods: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Lower bounds, upper bounds and 0-based partition index of the m*d intervals"""
    bounds = cfg.boundaries
    offsets = np.repeat(np.arange(periods, dtype=float) * cfg.period_tau, cfg.d)
    lows = offsets + np.tile(bounds[:-1], periods)
    highs = offsets + np.tile(bounds[1:], periods)
    part = np.tile(np.arange(cfg.d), periods)
    return lows, highs, part


def simulate_arrivals(cfg: SemiLevyConfig, periods: int, rng: np.random.Generator) -> JumpPath:
    """
    Arrival times over (0, periods*tau]: Poisson(lambda_i l_i) points per
    interval, placed uniformly on (s_{i-1}, s_i], then sorted.
    """
    if int(periods) != periods or periods < 1:
        raise ParameterError(f"periods must be a positive integer, got {periods!r}")
    periods = int(periods)

    lows, highs, part = interval_grid(cfg, periods)
    lam_l = np.asarray(cfg.rates)[part] * np.asarray(cfg.lengths)[part]
    counts = rng.poisson(lam_l)

    total = int(counts.sum())
    u = rng.random(total)
    lo = np.repeat(lows, counts)
    hi = np.repeat(highs, counts)
    # high - (high - low) * U with U in [0, 1) lies in (low, high]
    points = hi - (hi - lo) * u
    arrivals = np.sort(points, kind="stable")

    logger.debug("simulated %d arrivals over %d periods", total, periods)
    return JumpPath(arrivals=arrivals, jumps=None, horizon=periods * cfg.period_tau, config=cfg)


def simulate_jumps(path: JumpPath, cfg: SemiLevyConfig, rng: np.random.Generator) -> JumpPath:
    """Fill Z_n ~ F_j where j is the partition of the arrival time"""
    parts = partition_index(path.arrivals, cfg)
    jumps = np.empty(path.size, dtype=float)
    for j, dist in enumerate(cfg.jump_dists, start=1):
        mask = parts == j
        n_j = int(mask.sum())
        jumps[mask] = dist.sample(rng, n_j)
    return path.with_jumps(jumps)


def simulate_driver(cfg: SemiLevyConfig, periods: int, rng: np.random.Generator) -> JumpPath:
    """Arrivals then jumps from one stream"""
    return simulate_jumps(simulate_arrivals(cfg, periods, rng), cfg, rng)


# ==================== PATH FUNCTIONALS ====================

def _check_path_time(t: float, path: JumpPath) -> float:
    t = _check_time(t)
    if t > path.horizon * (1.0 + 1e-15):
        raise DomainError(f"t={t!r} is beyond the path horizon {path.horizon!r}")
    return t


def _require_jumps(path: JumpPath) -> np.ndarray:
    if path.jumps is None:
        raise ParameterError("jump sizes have not been simulated for this path")
    return path.jumps


def count_at(t: float, path: JumpPath) -> int:
    """N(t): number of arrivals in (0, t]"""
    t = _check_path_time(t, path)
    return int(np.searchsorted(path.arrivals, t, side="right"))


def evaluate_S(t: float, path: JumpPath, cfg: SemiLevyConfig) -> float:
    """S_t = delta*t + sum of jumps with arrival <= t"""
    t = _check_path_time(t, path)
    jumps = _require_jumps(path)
    n = int(np.searchsorted(path.arrivals, t, side="right"))
    return cfg.drift_delta * t + float(math.fsum(jumps[:n]))


def quadratic_variation(t: float, path: JumpPath) -> float:
    """[S,S]_t = sum of squared jumps up to t; drift contributes nothing"""
    t = _check_path_time(t, path)
    jumps = _require_jumps(path)
    n = int(np.searchsorted(path.arrivals, t, side="right"))
    return float(math.fsum(jumps[:n] ** 2))


# ==================== CHARACTERISTIC FUNCTION ====================

def jump_measure_weights(t: float, cfg: SemiLevyConfig) -> np.ndarray:
    """
    Total mass of nu_t carried by each F_j:
    (m+1) lambda_j l_j for j < r, m lambda_j l_j for j >= r, plus
    lambda_r (t - s_prev) on F_r.
    """
    phase = locate_phase(t, cfg)
    masses = cfg.period_masses
    weights = phase.m * masses
    weights[: phase.r - 1] += masses[: phase.r - 1]
    weights[phase.r - 1] += cfg.rates[phase.r - 1] * (t - phase.s_prev)
    return weights


def char_function(u, t: float, cfg: SemiLevyConfig):
    """E exp(iuS_t) = exp(iu delta t + sum_j w_j (phi_j(u) - 1)), uncompensated form"""
    t = float(t)
    if not (t > 0.0):
        raise DomainError(f"characteristic function needs t > 0, got {t!r}")
    weights = jump_measure_weights(t, cfg)
    u_arr = np.asarray(u, dtype=float)
    exponent = 1j * u_arr * cfg.drift_delta * t
    for w, dist in zip(weights, cfg.jump_dists):
        if w > 0.0:
            exponent = exponent + w * (dist.cf(u_arr) - 1.0)
    value = np.exp(exponent)
    return complex(value) if np.ndim(value) == 0 else value


def levy_khintchine_exponent(u: float, t: float, cfg: SemiLevyConfig) -> complex:
    """
    log E exp(iuS_t) in the compensated form
    iu gamma(t) + integral (e^{iuz} - 1 - iuz 1{|z|<=1}) nu_t(dz),
    gamma(t) = delta t + integral_{|z|<=1} z nu_t(dz),
    integrated numerically against the Normal densities.
    """
    t = float(t)
    if not (t > 0.0):
        raise DomainError(f"characteristic function needs t > 0, got {t!r}")
    weights = jump_measure_weights(t, cfg)
    gamma = cfg.drift_delta * t
    integral = 0.0 + 0.0j
    for w, dist in zip(weights, cfg.jump_dists):
        if w == 0.0:
            continue
        if not isinstance(dist, NormalJump) or dist.sigma2 == 0.0:
            # atoms: evaluate the integrand at the atom
            z = dist.mean
            small = 1.0 if abs(z) <= 1.0 else 0.0
            gamma += w * z * small
            integral += w * (np.exp(1j * u * z) - 1.0 - 1j * u * z * small)
            continue
        sd = math.sqrt(dist.sigma2)
        lo, hi = dist.mu - 12.0 * sd, dist.mu + 12.0 * sd

        def real_part(z):
            return (math.cos(u * z) - 1.0) * float(dist.density(z))

        def imag_part(z):
            small = 1.0 if abs(z) <= 1.0 else 0.0
            return (math.sin(u * z) - u * z * small) * float(dist.density(z))

        def truncated_first(z):
            return z * float(dist.density(z))

        points = [p for p in (-1.0, 1.0) if lo < p < hi]
        re_val, _ = integrate.quad(real_part, lo, hi, points=points or None, limit=200)
        im_val, _ = integrate.quad(imag_part, lo, hi, points=points or None, limit=200)
        a, b = max(lo, -1.0), min(hi, 1.0)
        trunc = integrate.quad(truncated_first, a, b, limit=200)[0] if a < b else 0.0
        gamma += w * trunc
        integral += w * complex(re_val, im_val)
    return 1j * u * gamma + integral


# ==================== MONTE CARLO MARGINALS ====================

def sample_marginal(t: float, cfg: SemiLevyConfig, n_paths: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    Draw (N(t), S_t) on n_paths independent paths.

    Completed intervals get Poisson(lambda_i l_i) counts; the interval
    containing t gets Poisson(lambda_r l_r) uniform points thinned to those
    <= t (a binomial draw). Jump sums are then accumulated partition by
    partition.
    """
    t = _check_time(t)
    if n_paths < 1:
        raise ParameterError("n_paths must be positive")
    counts_by_part = np.zeros((n_paths, cfg.d), dtype=np.int64)
    if t > 0.0:
        phase = locate_phase(t, cfg)
        if phase.m > 0:
            # m completed periods: sum of m Poisson counts per partition
            counts_by_part += rng.poisson(cfg.period_masses * phase.m, size=(n_paths, cfg.d))
        for j in range(phase.r - 1):
            counts_by_part[:, j] += rng.poisson(cfg.period_masses[j], size=n_paths)
        r = phase.r - 1
        full = rng.poisson(cfg.period_masses[r], size=n_paths)
        frac = min(max((t - phase.s_prev) / cfg.lengths[r], 0.0), 1.0)
        counts_by_part[:, r] += rng.binomial(full, frac)

    values = np.full(n_paths, cfg.drift_delta * t, dtype=float)
    path_index = np.arange(n_paths)
    for j, dist in enumerate(cfg.jump_dists):
        c = counts_by_part[:, j]
        total = int(c.sum())
        if total == 0:
            continue
        draws = dist.sample(rng, total)
        values += np.bincount(np.repeat(path_index, c), weights=draws, minlength=n_paths)
    return counts_by_part.sum(axis=1), values
