"""
Companion-matrix linear algebra.

B is the q x q companion matrix with ones on the superdiagonal and last row
(-beta_q, ..., -beta_1). Its eigenvalues are the roots of
lambda^q + beta_1 lambda^{q-1} + ... + beta_q, found here with a
simultaneous (Aberth-Ehrlich) iteration and Newton polishing. With distinct
roots, the Vandermonde matrix P (P[k, i] = eta_i^k) diagonalises B, so
e^{Bt} = P diag(e^{eta_i t}) P^{-1}.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Tuple, Union

import numpy as np
from scipy import linalg as sla

from app.shared.errors import DistinctnessError, NumericalError, ParameterError

logger = logging.getLogger(__name__)

DISTINCT_RTOL = 1e-8
MULTIPLICITY_RTOL = 1e-7
IMAG_RESIDUE_RTOL = 1e-10
CONDITION_WARNING = 1e12

NormOrder = Union[int, float, str]


# ==================== TYPES ====================

@dataclass(frozen=True)
class CompanionMatrix:
    """Companion matrix B built from beta_1..beta_q"""
    betas: Tuple[float, ...]

    @property
    def q(self) -> int:
        return len(self.betas)

    @property
    def matrix(self) -> np.ndarray:
        q = self.q
        B = np.zeros((q, q))
        if q > 1:
            B[np.arange(q - 1), np.arange(1, q)] = 1.0
        B[-1, :] = -np.asarray(self.betas[::-1], dtype=float)
        return B

    @property
    def char_poly(self) -> np.ndarray:
        """Coefficients of the characteristic polynomial, highest degree first"""
        return np.concatenate(([1.0], np.asarray(self.betas, dtype=float)))


@dataclass(frozen=True)
class EigenStructure:
    """Distinct eigenvalues of B and the Vandermonde change of basis"""
    eigenvalues: np.ndarray
    P: np.ndarray
    P_inv: np.ndarray
    eta_max: float
    condition: float

    @property
    def q(self) -> int:
        return int(self.eigenvalues.shape[0])


# ==================== CONSTRUCTION ====================

def companion(betas: Sequence[float]) -> CompanionMatrix:
    """Build B from beta_1..beta_q (beta_q must be non-zero)"""
    betas = tuple(float(b) for b in betas)
    if len(betas) < 1:
        raise ParameterError("companion matrix needs q >= 1")
    if any(not math.isfinite(b) for b in betas):
        raise ParameterError("betas must be finite")
    if betas[-1] == 0.0:
        raise ParameterError("beta_q must be non-zero")
    return CompanionMatrix(betas=betas)


def _poly_and_derivs(coeffs: np.ndarray, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    p = np.polyval(coeffs, z)
    dp = np.polyval(np.polyder(coeffs), z)
    return p, dp


def polynomial_roots(coeffs: Sequence[float], max_iter: int = 500, polish_steps: int = 3) -> np.ndarray:
    """
    All roots of a monic real polynomial (coefficients highest first) by
    Aberth-Ehrlich simultaneous iteration followed by Newton polishing.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    q = coeffs.shape[0] - 1
    if q < 1:
        return np.zeros(0, dtype=complex)
    if q == 1:
        return np.array([-coeffs[1] / coeffs[0]], dtype=complex)

    # Cauchy bound on root moduli; start on a rotated circle
    radius = 1.0 + np.max(np.abs(coeffs[1:] / coeffs[0]))
    angles = 2.0 * np.pi * np.arange(q) / q + 0.4
    z = 0.5 * radius * np.exp(1j * angles)

    for _ in range(max_iter):
        p, dp = _poly_and_derivs(coeffs, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dp != 0, p / dp, 0.0)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            repulsion = np.sum(1.0 / diff, axis=1) - 1.0
            step = ratio / (1.0 - ratio * repulsion)
        step = np.where(np.isfinite(step), step, 0.0)
        z = z - step
        if np.all(np.abs(step) <= 1e-15 * np.maximum(1.0, np.abs(z))):
            break

    for _ in range(polish_steps):
        p, dp = _poly_and_derivs(coeffs, z)
        safe = dp != 0
        z = np.where(safe, z - np.where(safe, p, 0.0) / np.where(safe, dp, 1.0), z)

    # real coefficients: snap tiny imaginary parts and enforce conjugate pairs
    scale = max(1.0, float(np.max(np.abs(z))))
    z = np.where(np.abs(z.imag) <= 1e-13 * scale, z.real + 0j, z)
    order = np.lexsort((-z.imag, -z.real))
    return z[order]


def _check_distinct(eta: np.ndarray, coeffs: np.ndarray) -> None:
    q = eta.shape[0]
    if q < 2:
        return
    scale = float(np.max(np.abs(eta)))
    diff = np.abs(eta[:, None] - eta[None, :])
    np.fill_diagonal(diff, np.inf)
    min_dist = float(diff.min())
    if min_dist < DISTINCT_RTOL * scale:
        raise DistinctnessError(f"eigenvalues are not distinct (min pairwise distance {min_dist:.3e})")

    # near-multiple roots come back split by ~sqrt(eps); catch them through p'
    dcoeffs = np.polyder(coeffs)
    dp = np.abs(np.polyval(dcoeffs, eta))
    powers = np.arange(dcoeffs.shape[0] - 1, -1, -1)
    norm = np.abs(dcoeffs)[None, :] * np.maximum(np.abs(eta), 1.0)[:, None] ** powers[None, :]
    relative = dp / norm.sum(axis=1)
    if np.any(relative < MULTIPLICITY_RTOL):
        raise DistinctnessError(
            f"eigenvalues are numerically repeated (min relative |p'(eta)| {float(relative.min()):.3e})"
        )


@lru_cache(maxsize=256)
def _eigen_cached(betas: Tuple[float, ...]) -> EigenStructure:
    B = CompanionMatrix(betas=betas)
    coeffs = B.char_poly
    eta = polynomial_roots(coeffs)
    _check_distinct(eta, coeffs)

    q = eta.shape[0]
    P = np.vander(eta, N=q, increasing=True).T.astype(complex)
    lu, piv = sla.lu_factor(P)
    P_inv = sla.lu_solve((lu, piv), np.eye(q, dtype=complex))
    condition = float(np.linalg.cond(P))
    if condition > CONDITION_WARNING:
        logger.warning("Vandermonde matrix is ill-conditioned (cond ~ %.3e)", condition)

    for arr in (eta, P, P_inv):
        arr.setflags(write=False)
    return EigenStructure(
        eigenvalues=eta,
        P=P,
        P_inv=P_inv,
        eta_max=float(np.max(eta.real)),
        condition=condition,
    )


def eigen(B: CompanionMatrix) -> EigenStructure:
    """Eigenvalues, Vandermonde P and P^{-1}; raises DistinctnessError on repeated roots"""
    return _eigen_cached(B.betas)


# ==================== EXPONENTIALS AND NORMS ====================

def exp_diagonal(eig: EigenStructure, t: float) -> np.ndarray:
    """e^{eta_i t} for each eigenvalue"""
    return np.exp(eig.eigenvalues * float(t))


def mat_exp(B: CompanionMatrix, t: float) -> np.ndarray:
    """e^{Bt} = Re(P diag(e^{eta t}) P^{-1})"""
    eig = eigen(B)
    return real_part((eig.P * exp_diagonal(eig, t)[None, :]) @ eig.P_inv)


def real_part(M: np.ndarray) -> np.ndarray:
    """Drop the imaginary residue of a result that must be real"""
    M = np.asarray(M)
    if not np.iscomplexobj(M):
        return M
    scale = max(1.0, float(np.max(np.abs(M.real))) if M.size else 1.0)
    residue = float(np.max(np.abs(M.imag))) if M.size else 0.0
    if residue > IMAG_RESIDUE_RTOL * scale:
        raise NumericalError(f"imaginary residue {residue:.3e} exceeds tolerance")
    return M.real.copy()


def _norm_order(r: NormOrder):
    if isinstance(r, str):
        key = r.strip().lower()
        if key in ("inf", "infinity", "rinf", "max"):
            return np.inf
        try:
            r = float(key)
        except ValueError:
            raise ParameterError(f"unsupported norm order {r!r}") from None
    if r == 1:
        return 1
    if r == 2:
        return 2
    if r == np.inf:
        return np.inf
    raise ParameterError(f"unsupported norm order {r!r}; use 1, 2 or inf")


def lr_norm(C: np.ndarray, r: NormOrder = 2) -> float:
    """
    Matrix L^r norm: r=1 max column sum, r=inf max row sum, r=2 largest
    singular value. Vectors get the vector L^r norm.
    """
    order = _norm_order(r)
    C = np.asarray(C)
    return float(np.linalg.norm(C, ord=order))


def natural_norm(C: np.ndarray, eig: EigenStructure, r: NormOrder = 2) -> float:
    """||C||_{P,r} = ||P^{-1} C P||_r; for a vector c, ||P^{-1} c||_r"""
    C = np.asarray(C)
    if C.ndim == 1:
        return lr_norm(eig.P_inv @ C, r)
    return lr_norm(eig.P_inv @ C @ eig.P, r)


SUPPORTED_NORMS: Tuple[NormOrder, ...] = (1, 2, np.inf)


def norm_label(r: NormOrder) -> str:
    order = _norm_order(r)
    return "rinf" if order == np.inf else f"r{int(order)}"
