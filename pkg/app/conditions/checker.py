"""
Stationarity and non-negativity certificates.

Three checks decide whether a (SemiLevyConfig, CogarchParams) pair is safe
to simulate:

  eigen       all eigenvalues of B distinct with negative real part
  log moment  integral log(1 + c z^2) F_j(dz) small enough against -eta*tau,
              with c = ||P^{-1} e a' P||_r, tried for r in {1, 2, inf}
  non-neg     a' e^{Bt} e >= 0 and a' e^{Bt} Y_0 >= gamma >= -alpha0 on a
              dense grid out to where the exponential tail is negligible

The log-moment check supports two rules. "partition" compares max_j I_j
with -eta*tau/Lambda(tau). "weighted" compares the rate-weighted mean
sum_j lambda_j l_j I_j / Lambda(tau) with the same constant, which is the
bound the contraction argument actually uses.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.cogarch.engine import CogarchParams
from app.matrix_core.linalg import (
    SUPPORTED_NORMS,
    EigenStructure,
    NormOrder,
    eigen,
    natural_norm,
    norm_label,
)
from app.semi_levy.process import SemiLevyConfig, cumulative_intensity
from app.shared import settings
from app.shared.errors import DistinctnessError, NumericalError, ParameterError

logger = logging.getLogger(__name__)

QUADRATURE_NODES = 128
QUADRATURE_CHECK_NODES = 96
QUADRATURE_RTOL = 1e-8
NONNEG_TOLERANCE = 1e-12
TAIL_CUTOFF = 1e-12
GRID_DIVISIONS = 1000
MAX_GRID_POINTS = 2_000_000
LOG_MOMENT_RULES = ("weighted", "partition")


# ==================== REPORT TYPES ====================

@dataclass(frozen=True)
class EigenCheck:
    ok: bool
    distinct: bool
    eta_max: Optional[float]
    eigenvalues: Tuple[complex, ...] = ()
    message: str = ""


@dataclass(frozen=True)
class LogMomentCheck:
    """Outcome of the log-moment condition for one norm"""
    norm: str
    ok: bool
    rule: str
    constant: Optional[float] = None
    integrals: Tuple[float, ...] = ()
    rhs: Optional[float] = None
    partition_margin: Optional[float] = None
    weighted_margin: Optional[float] = None
    message: str = ""

    @property
    def margin(self) -> Optional[float]:
        return self.weighted_margin if self.rule == "weighted" else self.partition_margin


@dataclass(frozen=True)
class NonnegCheck:
    ok: bool
    kernel_ok: bool
    f_min: Optional[float]
    g_min: Optional[float]
    gamma: Optional[float]
    floor: Optional[float]
    horizon: Optional[float]
    step: Optional[float]
    grid_points: int = 0
    message: str = ""


@dataclass(frozen=True)
class ConditionReport:
    eigen: EigenCheck
    log_moment: Dict[str, LogMomentCheck]
    nonneg: NonnegCheck
    notes: List[str] = field(default_factory=list)
    rule: str = "weighted"

    @property
    def eigen_ok(self) -> bool:
        return self.eigen.ok

    @property
    def log_moment_ok(self) -> bool:
        return any(check.ok for check in self.log_moment.values())

    @property
    def passing_norms(self) -> List[str]:
        return [label for label, check in self.log_moment.items() if check.ok]

    @property
    def nonneg_ok(self) -> bool:
        return self.nonneg.ok

    @property
    def overall(self) -> bool:
        return self.eigen_ok and self.log_moment_ok and self.nonneg_ok

    def to_key_values(self) -> Dict[str, str]:
        """Machine-readable summary, in file order"""
        values = {
            "eigen_ok": _fmt(self.eigen_ok),
            "eta_max": _fmt(self.eigen.eta_max),
            "log_moment_rule": self.rule,
        }
        for r in SUPPORTED_NORMS:
            label = norm_label(r)
            check = self.log_moment.get(label)
            values[f"log_moment_margin_{label}"] = _fmt(check.margin if check else None)
        values["log_moment_ok"] = _fmt(self.log_moment_ok)
        values["nonneg_ok"] = _fmt(self.nonneg_ok)
        values["gamma"] = _fmt(self.nonneg.gamma)
        values["floor"] = _fmt(self.nonneg.floor)
        values["overall"] = _fmt(self.overall)
        return values

    def to_text(self) -> str:
        lines = ["Condition report", "================", f"log-moment rule: {self.rule}"]
        eig = self.eigen
        lines.append(f"eigenvalues: {'OK' if eig.ok else 'FAIL'}  eta_max={_fmt(eig.eta_max)}  {eig.message}".rstrip())
        for label, check in self.log_moment.items():
            status = "OK" if check.ok else "FAIL"
            lines.append(
                f"log-moment [{label}, {check.rule}]: {status}  c={_fmt(check.constant)}  rhs={_fmt(check.rhs)}  "
                f"partition_margin={_fmt(check.partition_margin)}  weighted_margin={_fmt(check.weighted_margin)}"
                + (f"  ({check.message})" if check.message else "")
            )
        nn = self.nonneg
        lines.append(
            f"non-negativity: {'OK' if nn.ok else 'FAIL'}  min f={_fmt(nn.f_min)}  min g={_fmt(nn.g_min)}  "
            f"gamma={_fmt(nn.gamma)}  floor={_fmt(nn.floor)}  horizon={_fmt(nn.horizon)}  step={_fmt(nn.step)}"
            + (f"  ({nn.message})" if nn.message else "")
        )
        for note in self.notes:
            lines.append(f"note: {note}")
        lines.append(f"overall: {'OK' if self.overall else 'FAIL'}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        summary = dict(self.to_key_values())
        summary["passing_norms"] = self.passing_norms
        summary["notes"] = list(self.notes)
        summary["text"] = self.to_text()
        return summary


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.15g}"
    return str(value)


# ==================== EIGENVALUE CONDITION ====================

def check_eigen(params: CogarchParams) -> EigenCheck:
    """True iff the eigenvalues of B are distinct and all have negative real part"""
    try:
        eig = eigen(params.B)
    except DistinctnessError as e:
        return EigenCheck(ok=False, distinct=False, eta_max=None, message=str(e))
    ok = eig.eta_max < 0.0
    message = "" if ok else f"eigenvalue with non-negative real part (eta_max={eig.eta_max:.6g})"
    return EigenCheck(
        ok=ok,
        distinct=True,
        eta_max=eig.eta_max,
        eigenvalues=tuple(complex(v) for v in eig.eigenvalues),
        message=message,
    )


# ==================== LOG-MOMENT CONDITION ====================

def jump_constant(params: CogarchParams, eig: EigenStructure, r: NormOrder) -> float:
    """c = ||P^{-1} e a' P||_r"""
    return natural_norm(np.outer(params.e, params.a), eig, r)


def log_moment_integral(dist, c: float) -> float:
    """E log(1 + c Z^2) by Gauss-Hermite, checked against a coarser rule"""
    z, w = dist.quadrature(QUADRATURE_NODES)
    fine = float(np.dot(w, np.log1p(c * z * z)))
    z, w = dist.quadrature(QUADRATURE_CHECK_NODES)
    coarse = float(np.dot(w, np.log1p(c * z * z)))
    diff = abs(fine - coarse)
    if diff > QUADRATURE_RTOL * abs(fine) and diff > 1e-300:
        raise NumericalError(
            f"log-moment quadrature did not converge for {dist.to_text()} "
            f"(|I_{QUADRATURE_NODES} - I_{QUADRATURE_CHECK_NODES}| = {diff:.3e})"
        )
    return fine


def log_moment_rhs(cfg: SemiLevyConfig, eta_max: float, t: float = 0.0) -> float:
    """-eta*tau / (Lambda(t + tau) - Lambda(t)); independent of t by periodicity"""
    increment = cumulative_intensity(t + cfg.period_tau, cfg) - cumulative_intensity(t, cfg)
    if increment <= 0.0:
        return math.inf
    return -eta_max * cfg.period_tau / increment


def check_log_moment(
    cfg: SemiLevyConfig,
    params: CogarchParams,
    r: NormOrder,
    rule: Optional[str] = None,
) -> LogMomentCheck:
    """
    Log-moment condition under the natural norm of order r.

    Raises NumericalError if the quadrature does not converge and
    ParameterError for an unknown rule or when the eigenvalue condition fails.
    """
    rule = (rule or settings.LOG_MOMENT_RULE).strip().lower()
    if rule not in LOG_MOMENT_RULES:
        raise ParameterError(f"unknown log-moment rule {rule!r}; use one of {LOG_MOMENT_RULES}")
    eig = eigen(params.B)
    if eig.eta_max >= 0.0:
        raise ParameterError("log-moment condition needs all eigenvalues in the left half-plane")

    label = norm_label(r)
    c = jump_constant(params, eig, r)
    integrals = np.array([log_moment_integral(dist, c) for dist in cfg.jump_dists])
    masses = cfg.period_masses
    total = cfg.mass_per_period

    if total <= 0.0:
        # no jumps at all: the drift alone contracts
        margin = -eig.eta_max * cfg.period_tau
        return LogMomentCheck(
            norm=label, ok=True, rule=rule, constant=c, integrals=tuple(integrals.tolist()),
            rhs=None, partition_margin=margin, weighted_margin=margin, message="no jumps",
        )

    rhs = -eig.eta_max * cfg.period_tau / total
    active = masses > 0.0
    partition_margin = rhs - float(integrals[active].max())
    weighted_margin = rhs - float(math.fsum(masses * integrals)) / total
    margin = weighted_margin if rule == "weighted" else partition_margin
    logger.debug("log-moment %s: c=%.6g rhs=%.6g margins=(%.6g, %.6g)", label, c, rhs, partition_margin, weighted_margin)
    return LogMomentCheck(
        norm=label,
        ok=margin > 0.0,
        rule=rule,
        constant=c,
        integrals=tuple(integrals.tolist()),
        rhs=rhs,
        partition_margin=partition_margin,
        weighted_margin=weighted_margin,
    )


# ==================== NON-NEGATIVITY CONDITION ====================

def _kernel_values(params: CogarchParams, eig: EigenStructure, x: np.ndarray, times: np.ndarray) -> np.ndarray:
    """a' e^{Bt} x on a grid of times"""
    left = params.a @ eig.P
    right = eig.P_inv @ x.astype(complex)
    return (np.exp(np.outer(times, eig.eigenvalues)) @ (left * right)).real


def check_horizon(params: CogarchParams, eig: EigenStructure) -> float:
    """T beyond which ||a|| e^{eta t} cond(P) ||x|| < 1e-12 for x in {e, Y_0}"""
    scale = np.linalg.norm(params.a) * eig.condition * max(1.0, float(np.linalg.norm(params.initial_state)))
    if scale <= TAIL_CUTOFF:
        return 0.0
    return max(0.0, math.log(TAIL_CUTOFF / scale) / eig.eta_max)


def check_nonneg(
    cfg: SemiLevyConfig,
    params: CogarchParams,
    horizon: Optional[float] = None,
    step: Optional[float] = None,
) -> NonnegCheck:
    """
    Grid certificate for a' e^{Bt} e >= 0 and a' e^{Bt} Y_0 >= gamma >= -alpha0.

    Failure is reported, never raised.
    """
    try:
        eig = eigen(params.B)
    except DistinctnessError as e:
        return NonnegCheck(False, False, None, None, None, None, None, None, message=str(e))
    if eig.eta_max >= 0.0:
        return NonnegCheck(
            False, False, None, None, None, None, None, None,
            message="tail bound needs all eigenvalues in the left half-plane",
        )

    h = float(step) if step is not None else cfg.period_tau / GRID_DIVISIONS
    if not (h > 0.0):
        raise ParameterError(f"grid step must be positive, got {step!r}")
    T = float(horizon) if horizon is not None else check_horizon(params, eig)
    n_steps = int(math.ceil(T / h))
    if n_steps + 1 > MAX_GRID_POINTS:
        h = T / (MAX_GRID_POINTS - 1)
        n_steps = MAX_GRID_POINTS - 1
        logger.warning("non-negativity grid capped at %d points (step %.3e)", MAX_GRID_POINTS, h)
    times = np.arange(n_steps + 1) * h

    f = _kernel_values(params, eig, params.e, times)
    g = _kernel_values(params, eig, params.initial_state, times)
    f_min = float(f.min())
    g_min = float(g.min())
    kernel_ok = f_min >= -NONNEG_TOLERANCE
    gamma = min(g_min, 0.0)
    initial_ok = gamma >= -params.alpha0

    messages = []
    if not kernel_ok:
        messages.append(f"a'e^(Bt)e reaches {f_min:.3e} at t={times[int(np.argmin(f))]:.6g}")
    if not initial_ok:
        messages.append(f"a'e^(Bt)Y0 reaches {g_min:.3e} < -alpha0")
    return NonnegCheck(
        ok=kernel_ok and initial_ok,
        kernel_ok=kernel_ok,
        f_min=f_min,
        g_min=g_min,
        gamma=gamma,
        floor=params.alpha0 + gamma,
        horizon=T,
        step=h,
        grid_points=int(times.shape[0]),
        message="; ".join(messages),
    )


# ==================== FULL CHECK ====================

def check_conditions(
    cfg: SemiLevyConfig,
    params: CogarchParams,
    norms: Sequence[NormOrder] = SUPPORTED_NORMS,
    rule: Optional[str] = None,
    horizon: Optional[float] = None,
    step: Optional[float] = None,
) -> ConditionReport:
    """Run every check; numerical failures in one norm are recorded and do not stop the others"""
    eig_check = check_eigen(params)
    notes: List[str] = []
    log_checks: Dict[str, LogMomentCheck] = {}
    rule_name = (rule or settings.LOG_MOMENT_RULE).strip().lower()
    if rule_name not in LOG_MOMENT_RULES:
        raise ParameterError(f"unknown log-moment rule {rule_name!r}; use one of {LOG_MOMENT_RULES}")

    for r in norms:
        label = norm_label(r)
        if not eig_check.ok:
            log_checks[label] = LogMomentCheck(norm=label, ok=False, rule=rule_name, message="eigenvalue condition failed")
            continue
        try:
            log_checks[label] = check_log_moment(cfg, params, r, rule_name)
        except NumericalError as e:
            logger.warning("log-moment check %s: %s", label, e)
            notes.append(f"{label}: {e}")
            log_checks[label] = LogMomentCheck(norm=label, ok=False, rule=rule_name, message=str(e))

    nonneg = check_nonneg(cfg, params, horizon=horizon, step=step)
    report = ConditionReport(eigen=eig_check, log_moment=log_checks, nonneg=nonneg, notes=notes, rule=rule_name)
    logger.info(
        "condition check: eigen=%s log_moment[%s]=%s nonneg=%s overall=%s",
        report.eigen_ok, rule_name, report.log_moment_ok, report.nonneg_ok, report.overall,
    )
    return report
