"""Nearest positive semi-definite matrix in the elementwise max-norm.

The Gram surrogate can be indefinite; restoring convexity of the
downstream l1 problem needs the closest PSD matrix in max-norm, solved by
ADMM on the splitting

    minimize  I_PSD(S) + ||R - target||_max   subject to  S = R.

The S-update is Frobenius projection onto the PSD cone (eigenvalue
clipping); the R-update is the max-norm prox, evaluated through Moreau
decomposition as an l1-ball projection of the vectorized matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError


@dataclass(frozen=True)
class AdmmSettings:
    penalty: float = 0.25
    max_iter: int = 2000
    primal_tol: float = 1e-6
    dual_tol: float = 1e-6
    over_relaxation: float = 1.6

    def validate(self) -> None:
        if not self.penalty > 0:
            raise ValidationError(f"penalty must be positive, got {self.penalty}")
        if self.max_iter < 1:
            raise ValidationError(f"max_iter must be >= 1, got {self.max_iter}")
        if not (self.primal_tol > 0 and self.dual_tol > 0):
            raise ValidationError("primal_tol and dual_tol must be positive")
        if not 0 < self.over_relaxation < 2:
            raise ValidationError(f"over_relaxation must lie in (0, 2), got {self.over_relaxation}")


@dataclass(frozen=True, eq=False)
class PsdProjectionResult:
    sigma_tilde: np.ndarray
    max_norm_distance: float
    iterations: int
    converged: bool


def _check_symmetric(s: np.ndarray, what: str) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValidationError(f"{what} must be square, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ValidationError(f"{what} contains non-finite entries")
    asym = np.max(np.abs(s - s.T)) if s.size else 0.0
    if asym > 1e-8 * max(1.0, np.max(np.abs(s))):
        raise ValidationError(f"{what} is not symmetric (max asymmetry {asym:.3g})")
    return s


def project_psd_cone(s: np.ndarray) -> np.ndarray:
    """Frobenius projection onto the PSD cone by eigenvalue clipping."""
    s = _check_symmetric(s, "matrix")
    try:
        w, v = np.linalg.eigh(s)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    if w.size == 0 or w[0] >= 0:
        return s
    w = np.clip(w, 0.0, None)
    out = (v * w) @ v.T
    return (out + out.T) / 2


def project_l1_ball(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection onto {x : ||x||_1 <= radius}, sort-and-threshold."""
    if not radius > 0:
        raise ValidationError(f"radius must be positive, got {radius}")
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValidationError("vector contains non-finite entries")
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    u = np.sort(a)[::-1]
    cumsum = np.cumsum(u)
    k = np.nonzero(u * np.arange(1, v.size + 1) > (cumsum - radius))[0][-1]
    theta = (cumsum[k] - radius) / (k + 1.0)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def nearest_psd_maxnorm(sigma_hat: np.ndarray,
                        settings: AdmmSettings = AdmmSettings()) -> PsdProjectionResult:
    """PSD matrix closest to ``sigma_hat`` in elementwise max-norm.

    Runs scaled over-relaxed ADMM until both residuals fall below
    tol * p, then symmetrizes and clips once more so the returned matrix
    is PSD to within eigensolver roundoff regardless of where the loop
    stopped. A PSD input is returned unchanged.
    """
    s = _check_symmetric(sigma_hat, "gram surrogate")
    settings.validate()
    p = s.shape[0]
    scale = max(1.0, np.max(np.abs(s))) if s.size else 1.0

    w = np.linalg.eigvalsh(s)
    if w.size == 0 or w[0] >= -1e-12 * scale:
        return PsdProjectionResult(sigma_tilde=s.copy(), max_norm_distance=0.0,
                                   iterations=0, converged=True)

    rho = settings.penalty
    alpha = settings.over_relaxation
    r = s.copy()
    u = np.zeros_like(s)
    sig = r
    converged = False
    it = 0
    for it in range(1, settings.max_iter + 1):
        sig = project_psd_cone(r - u)
        sig_rel = alpha * sig + (1.0 - alpha) * r
        vmat = sig_rel + u - s
        r_new = s + (vmat - project_l1_ball(vmat.ravel(), 1.0 / rho).reshape(p, p))
        dual_res = rho * np.linalg.norm(r_new - r)
        u = u + sig_rel - r_new
        r = r_new
        primal_res = np.linalg.norm(sig - r)
        if primal_res <= settings.primal_tol * p and dual_res <= settings.dual_tol * p:
            converged = True
            break

    out = project_psd_cone((sig + sig.T) / 2)
    return PsdProjectionResult(sigma_tilde=out,
                               max_norm_distance=float(np.max(np.abs(out - s))),
                               iterations=it, converged=converged)
