"""
COGARCH(p,q) driven by a semi-Lévy compound Poisson process.

Between jumps the state drifts, Y_t = e^{B(t - u)} Y_u. At an arrival
Upsilon_n with jump Z_n, in this order:

    V_n = alpha0 + a' e^{B dt} Y_{n-1}          (left limit of V)
    G_n = G_{n-1} + sqrt(V_n) Z_n
    Y_n = e^{B dt} Y_{n-1} + e V_n Z_n^2

Swapping the order gives a different process. The path simulator runs the
recursion in eigen coordinates W = P^{-1} Y, where the drift is diagonal;
state_at and recurrence_pair use explicit matrix exponentials and serve as
independent checks of it.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.matrix_core.linalg import CompanionMatrix, companion, eigen, mat_exp, real_part
from app.semi_levy.process import JumpPath, SemiLevyConfig, simulate_driver
from app.shared.errors import DomainError, ModelViolationError, ParameterError

logger = logging.getLogger(__name__)

GRID_RTOL = 1e-9


# ==================== DOMAIN TYPES ====================

class CogarchParams(BaseModel):
    """Orders, coefficients and initial state of the volatility model"""
    model_config = ConfigDict(frozen=True)

    p: int = Field(..., ge=1)
    q: int = Field(..., ge=1)
    alpha0: float = Field(..., gt=0.0)
    alphas: Tuple[float, ...] = Field(..., min_length=1, description="alpha_1..alpha_p (or padded to q with zeros)")
    betas: Tuple[float, ...] = Field(..., min_length=1, description="beta_1..beta_q")
    y0: Optional[Tuple[float, ...]] = Field(None, description="Deterministic initial state Y_0 (zeros if omitted)")

    @model_validator(mode="after")
    def _check_orders(self):
        if self.q < self.p:
            raise ValueError(f"need q >= p >= 1 (got p={self.p}, q={self.q})")
        if len(self.alphas) not in (self.p, self.q):
            raise ValueError(f"alphas must have length p={self.p} (or q={self.q} with trailing zeros)")
        if any(a != 0.0 for a in self.alphas[self.p:]):
            raise ValueError("alpha_{p+1}..alpha_q must be zero")
        if self.alphas[self.p - 1] == 0.0:
            raise ValueError("alpha_p must be non-zero")
        if len(self.betas) != self.q:
            raise ValueError(f"betas must have length q={self.q}")
        if self.betas[-1] == 0.0:
            raise ValueError("beta_q must be non-zero")
        if self.y0 is not None and len(self.y0) != self.q:
            raise ValueError(f"y0 must have length q={self.q}")
        return self

    @property
    def a(self) -> np.ndarray:
        a = np.zeros(self.q)
        a[: self.p] = self.alphas[: self.p]
        return a

    @property
    def e(self) -> np.ndarray:
        e = np.zeros(self.q)
        e[-1] = 1.0
        return e

    @property
    def B(self) -> CompanionMatrix:
        return companion(self.betas)

    @property
    def initial_state(self) -> np.ndarray:
        if self.y0 is None:
            return np.zeros(self.q)
        return np.asarray(self.y0, dtype=float)


@dataclass(frozen=True)
class CogarchPath:
    """Jump-time records and equally spaced samples of one path"""
    arrivals: np.ndarray
    states: np.ndarray
    v_jump: np.ndarray
    g_jump: np.ndarray
    grid_times: np.ndarray
    v_grid: np.ndarray
    g_grid: np.ndarray
    sample_interval: float
    samples_per_period: int
    jump_path: JumpPath

    @property
    def n_samples(self) -> int:
        return int(self.grid_times.shape[0])

    @property
    def min_volatility(self) -> float:
        values = [float(self.v_grid.min())] if self.v_grid.size else []
        if self.v_jump.size:
            values.append(float(self.v_jump.min()))
        return min(values) if values else math.inf


@dataclass(frozen=True)
class RecurrencePair:
    """Y_t = J Y_s + K for the jumps in (s, t]"""
    J: np.ndarray
    K: np.ndarray
    s: float
    t: float

    def apply(self, y_s: np.ndarray) -> np.ndarray:
        return self.J @ np.asarray(y_s, dtype=float) + self.K


# ==================== SINGLE-STEP OPERATIONS ====================

def state_update(y_prev: np.ndarray, dt: float, z: float, params: CogarchParams) -> np.ndarray:
    """Y_n = (I + Z^2 e a') e^{B dt} Y_{n-1} + alpha0 Z^2 e"""
    if dt < 0.0:
        raise DomainError(f"dt must be non-negative, got {dt!r}")
    y_minus = mat_exp(params.B, dt) @ np.asarray(y_prev, dtype=float)
    v = params.alpha0 + float(params.a @ y_minus)
    return y_minus + params.e * (v * z * z)


def volatility_at_jump(y_prev: np.ndarray, dt: float, params: CogarchParams) -> float:
    """V at an arrival from the pre-jump state: alpha0 + a' e^{B dt} Y_{n-1}"""
    if dt < 0.0:
        raise DomainError(f"dt must be non-negative, got {dt!r}")
    return params.alpha0 + float(params.a @ (mat_exp(params.B, dt) @ np.asarray(y_prev, dtype=float)))


# ==================== PATH SIMULATION ====================

def samples_per_period(period_tau: float, sample_interval: float) -> int:
    """rho = tau / l, which must be a positive integer"""
    if not (sample_interval > 0.0):
        raise ParameterError(f"sample interval must be positive, got {sample_interval!r}")
    ratio = period_tau / sample_interval
    rho = int(round(ratio))
    if rho < 1 or abs(ratio - rho) > GRID_RTOL * max(1.0, ratio):
        raise ParameterError(f"tau/l = {ratio!r} is not a positive integer")
    return rho


def simulate_path(jump_path: JumpPath, params: CogarchParams, sample_interval: float) -> CogarchPath:
    """
    Run the jump recursion over every arrival, then sample V and G on the
    grid i*l for i = 0 .. m*rho - 1.
    """
    if jump_path.jumps is None:
        raise ParameterError("jump path has no jump sizes")
    cfg = jump_path.config
    rho = samples_per_period(cfg.period_tau, sample_interval)
    periods = jump_path.horizon / cfg.period_tau
    if abs(periods - round(periods)) > GRID_RTOL * max(1.0, periods):
        raise ParameterError("jump path horizon must be a whole number of periods")
    n_samples = int(round(periods)) * rho

    eig = eigen(params.B)
    eta = eig.eigenvalues
    aP = params.a @ eig.P
    pinv_e = eig.P_inv[:, -1]
    alpha0 = params.alpha0

    arrivals = jump_path.arrivals
    jumps = jump_path.jumps
    n_jumps = arrivals.shape[0]

    w_all = np.empty((n_jumps + 1, params.q), dtype=complex)
    w_all[0] = eig.P_inv @ params.initial_state.astype(complex)
    v_jump = np.empty(n_jumps)
    g_jump = np.empty(n_jumps)

    w = w_all[0]
    g = 0.0
    prev = 0.0
    for n in range(n_jumps):
        w_minus = w * np.exp(eta * (arrivals[n] - prev))
        v = alpha0 + (aP @ w_minus).real
        if v < 0.0:
            raise ModelViolationError(
                f"negative volatility {v:.6e} at t={arrivals[n]:.6f}; the parameters violate "
                f"the non-negativity conditions (run the condition check)"
            )
        z = jumps[n]
        g += math.sqrt(v) * z
        w = w_minus + pinv_e * (v * z * z)
        w_all[n + 1] = w
        v_jump[n] = v
        g_jump[n] = g
        prev = arrivals[n]

    states = real_part(w_all[1:] @ eig.P.T) if n_jumps else np.zeros((0, params.q))

    grid_times = np.arange(n_samples) * float(sample_interval)
    # V uses the last arrival strictly before il (left limit), G the last arrival <= il
    left = np.searchsorted(arrivals, grid_times, side="left")
    base_times = np.concatenate(([0.0], arrivals))[left]
    decay = np.exp(np.outer(grid_times - base_times, eta))
    v_grid = alpha0 + (np.sum(w_all[left] * decay * aP[None, :], axis=1)).real
    if v_grid.size and v_grid.min() < 0.0:
        bad = int(np.argmin(v_grid))
        raise ModelViolationError(
            f"negative volatility {v_grid[bad]:.6e} at grid time {grid_times[bad]:.6f}; the parameters "
            f"violate the non-negativity conditions (run the condition check)"
        )
    right = np.searchsorted(arrivals, grid_times, side="right")
    g_grid = np.concatenate(([0.0], g_jump))[right]

    logger.debug("simulated COGARCH path: %d jumps, %d grid samples", n_jumps, n_samples)
    return CogarchPath(
        arrivals=arrivals,
        states=states,
        v_jump=v_jump,
        g_jump=g_jump,
        grid_times=grid_times,
        v_grid=v_grid,
        g_grid=g_grid,
        sample_interval=float(sample_interval),
        samples_per_period=rho,
        jump_path=jump_path,
    )


def increments(path: CogarchPath) -> np.ndarray:
    """G_{(i+1)l} - G_{il}; one shorter than the grid"""
    return np.diff(path.g_grid)


def simulate_ensemble(
    cfg: SemiLevyConfig,
    params: CogarchParams,
    periods: int,
    sample_interval: float,
    seeds: Iterable[int],
) -> List[CogarchPath]:
    """Independent replications, one seeded stream each"""
    paths = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        paths.append(simulate_path(simulate_driver(cfg, periods, rng), params, sample_interval))
    return paths


def drop_burn_in(path: CogarchPath, periods: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Grid times, V and G after discarding the first `periods` periods"""
    start = int(periods) * path.samples_per_period
    return path.grid_times[start:], path.v_grid[start:], path.g_grid[start:]


# ==================== STATE EVOLUTION AND RECURRENCE ====================

def _jumps_between(jump_path: JumpPath, s: float, t: float) -> Tuple[np.ndarray, np.ndarray]:
    lo = np.searchsorted(jump_path.arrivals, s, side="right")
    hi = np.searchsorted(jump_path.arrivals, t, side="right")
    return jump_path.arrivals[lo:hi], jump_path.jumps[lo:hi]


def _check_interval(jump_path: JumpPath, s: float, t: float) -> None:
    if jump_path.jumps is None:
        raise ParameterError("jump path has no jump sizes")
    if s > t:
        raise ParameterError(f"need s <= t (got s={s!r}, t={t!r})")
    if s < 0.0 or t > jump_path.horizon * (1.0 + 1e-15):
        raise DomainError(f"interval ({s!r}, {t!r}] is outside (0, {jump_path.horizon!r}]")


def state_at(
    jump_path: JumpPath,
    params: CogarchParams,
    t: float,
    y_start: Optional[np.ndarray] = None,
    t_start: float = 0.0,
) -> np.ndarray:
    """Y_t (right-continuous) evolved from Y_{t_start} = y_start through the jumps in (t_start, t]"""
    _check_interval(jump_path, t_start, t)
    y = params.initial_state if y_start is None else np.asarray(y_start, dtype=float)
    prev = float(t_start)
    arrivals, jumps = _jumps_between(jump_path, t_start, t)
    for upsilon, z in zip(arrivals, jumps):
        y = state_update(y, upsilon - prev, z, params)
        prev = upsilon
    return mat_exp(params.B, t - prev) @ y


def recurrence_pair(jump_path: JumpPath, params: CogarchParams, s: float, t: float) -> RecurrencePair:
    """
    J_{s,t} = e^{B(t - Y_last)} prod (I + Z^2 e a') e^{B dt} ... e^{B(Y_first - s)}
    and the matching inhomogeneous term K_{s,t}.
    """
    _check_interval(jump_path, s, t)
    q = params.q
    ea = np.outer(params.e, params.a)
    identity = np.eye(q)
    J = identity.copy()
    K = np.zeros(q)
    prev = float(s)
    arrivals, jumps = _jumps_between(jump_path, s, t)
    for upsilon, z in zip(arrivals, jumps):
        step = (identity + z * z * ea) @ mat_exp(params.B, upsilon - prev)
        J = step @ J
        K = step @ K + params.alpha0 * z * z * params.e
        prev = upsilon
    drift = mat_exp(params.B, t - prev)
    return RecurrencePair(J=drift @ J, K=drift @ K, s=float(s), t=float(t))
