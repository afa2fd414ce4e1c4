"""Unbiased Gram and cross-moment surrogates under covariate corruption.

The observed design W stands in for the clean X. For each corruption
mechanism with known nuisance parameters, these estimators undo the bias
in W'W/n and W'z/n; the Gram surrogate may be indefinite, which is why
the pipeline projects it to the PSD cone afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

KINDS = ("none", "additive", "multiplicative", "missing")


@dataclass(frozen=True, eq=False)
class CorruptionModel:
    """How W was produced from X, with known nuisance parameters.

    kind "none":           W = X.
    kind "additive":       W = X + noise, rows with covariance noise_cov.
    kind "multiplicative": W = X * M elementwise, M rows with mean
                           scale_mean and covariance scale_cov.
    kind "missing":        W = X with cells zeroed independently, column j
                           missing with probability miss_prob[j].
    """

    kind: str
    noise_cov: np.ndarray | None = None
    scale_mean: np.ndarray | None = None
    scale_cov: np.ndarray | None = None
    miss_prob: np.ndarray | None = None

    @staticmethod
    def none() -> "CorruptionModel":
        return CorruptionModel(kind="none")

    @staticmethod
    def additive(noise_cov: np.ndarray) -> "CorruptionModel":
        return CorruptionModel(kind="additive", noise_cov=np.asarray(noise_cov, dtype=float))

    @staticmethod
    def multiplicative(scale_mean: np.ndarray, scale_cov: np.ndarray) -> "CorruptionModel":
        return CorruptionModel(kind="multiplicative",
                               scale_mean=np.asarray(scale_mean, dtype=float),
                               scale_cov=np.asarray(scale_cov, dtype=float))

    @staticmethod
    def missing(miss_prob) -> "CorruptionModel":
        return CorruptionModel(kind="missing",
                               miss_prob=np.atleast_1d(np.asarray(miss_prob, dtype=float)))

    def validate(self, p: int) -> None:
        """Check parameter shapes and invariants against design width p."""
        if self.kind not in KINDS:
            raise ValidationError(f"unknown corruption kind {self.kind!r}, expected one of {KINDS}")
        if self.kind == "none":
            return
        if self.kind == "additive":
            s = self.noise_cov
            if s is None or s.shape != (p, p):
                raise ValidationError(f"additive model needs a ({p}, {p}) noise covariance")
            if not np.all(np.isfinite(s)):
                raise ValidationError("noise covariance has non-finite entries")
            if np.max(np.abs(s - s.T)) > 1e-8 * max(1.0, np.max(np.abs(s))):
                raise ValidationError("noise covariance must be symmetric")
            if np.linalg.eigvalsh(s)[0] < -1e-10 * max(1.0, np.max(np.abs(s))):
                raise ValidationError("noise covariance must be positive semi-definite")
        elif self.kind == "multiplicative":
            mu, sc = self.scale_mean, self.scale_cov
            if mu is None or mu.shape != (p,):
                raise ValidationError(f"multiplicative model needs a length-{p} mean vector")
            if sc is None or sc.shape != (p, p):
                raise ValidationError(f"multiplicative model needs a ({p}, {p}) covariance")
            if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sc))):
                raise ValidationError("multiplicative parameters have non-finite entries")
            if np.any(mu <= 0):
                raise ValidationError("multiplicative scale means must all be positive")
            div = sc + np.outer(mu, mu)
            if np.any(div == 0):
                i, j = np.argwhere(div == 0)[0]
                raise ValidationError(f"second-moment divisor is zero at entry ({i}, {j})")
        else:
            pi = self.miss_prob
            if pi is None or pi.shape not in ((p,), (1,)):
                raise ValidationError(f"missing model needs a scalar or length-{p} probability vector")
            if not np.all(np.isfinite(pi)):
                raise ValidationError("missing probabilities have non-finite entries")
            if np.any(pi < 0) or np.any(pi >= 1):
                raise ValidationError("missing probabilities must lie in [0, 1)")

    def miss_prob_full(self, p: int) -> np.ndarray:
        """Per-column missing probabilities broadcast to length p."""
        pi = self.miss_prob
        return np.full(p, pi[0]) if pi.shape == (1,) else pi


@dataclass(frozen=True, eq=False)
class SurrogatePair:
    """Symmetric (possibly indefinite) Gram surrogate with its provenance."""

    sigma_hat: np.ndarray
    model: CorruptionModel
    n: int


def _check_design(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 2:
        raise ValidationError(f"design matrix must be 2-D, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValidationError("design matrix contains non-finite entries")
    return w


def gram_surrogate(w: np.ndarray, model: CorruptionModel) -> SurrogatePair:
    """Unbiased estimate of X'X/n from the corrupted design.

    none           -> W'W/n
    additive       -> W'W/n - noise_cov
    multiplicative -> W'W/n divided elementwise by the known second-moment
                      matrix of the scales
    missing        -> multiplicative special case with Bernoulli masks:
                      divisor (1-pi_i)(1-pi_j) off-diagonal, (1-pi_j) on
                      the diagonal
    """
    w = _check_design(w)
    n, p = w.shape
    model.validate(p)
    g = w.T @ w / n
    if model.kind == "additive":
        g = g - model.noise_cov
    elif model.kind == "multiplicative":
        div = model.scale_cov + np.outer(model.scale_mean, model.scale_mean)
        g = g / div
    elif model.kind == "missing":
        keep = 1.0 - model.miss_prob_full(p)
        div = np.outer(keep, keep)
        np.fill_diagonal(div, keep)
        if np.any(div == 0):
            i, j = np.argwhere(div == 0)[0]
            raise ValidationError(f"observation-probability divisor is zero at entry ({i}, {j})")
        g = g / div
    g = (g + g.T) / 2
    return SurrogatePair(sigma_hat=g, model=model, n=n)


def cross_surrogate(w: np.ndarray, z_k: np.ndarray, model: CorruptionModel) -> np.ndarray:
    """Unbiased estimate of X'z/n for a factor z of norm sqrt(n)."""
    w = _check_design(w)
    n, p = w.shape
    model.validate(p)
    z_k = np.asarray(z_k, dtype=float)
    if z_k.shape != (n,):
        raise ValidationError(f"factor has shape {z_k.shape}, expected ({n},)")
    nrm = np.linalg.norm(z_k)
    if abs(nrm - np.sqrt(n)) > 1e-6 * np.sqrt(n):
        raise ValidationError(f"factor norm {nrm:.6g} differs from sqrt(n) = {np.sqrt(n):.6g}")
    v = w.T @ z_k / n
    if model.kind == "multiplicative":
        v = v / model.scale_mean
    elif model.kind == "missing":
        v = v / (1.0 - model.miss_prob_full(p))
    return v
