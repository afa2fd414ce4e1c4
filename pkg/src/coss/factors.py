"""Latent factor extraction from the response matrix, and rank selection.

Everything in this module depends on the response matrix Y only, never on
the (possibly corrupted) design. Factors are eigenvectors of YY'/(nq)
rescaled to l2-norm sqrt(n); the rank is chosen by a BIC-type criterion on
the residual trace of the sequential fit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError

# relative gap below which two adjacent eigenvalues are reported as tied
_TIE_RTOL = 1e-10
# relative residual level treated as a perfect (degenerate) fit
_PERFECT_FIT_RTOL = 1e-12


def _check_response(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise ValidationError(f"response matrix must be 2-D, got shape {y.shape}")
    n, q = y.shape
    if n < 2 or q < 2:
        raise ValidationError(f"response matrix needs n >= 2 and q >= 2, got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValidationError("response matrix contains non-finite entries")
    return y


@dataclass(frozen=True, eq=False)
class LatentFactorSet:
    """Retained eigenvectors of YY'/(nq), columns scaled to norm sqrt(n).

    ``factors`` is (n, K) with eigenvalues sorted descending in
    ``eigenvalues``; ``count_above_tol`` is the number of eigenvalues
    exceeding the termination tolerance before any k_max truncation, and
    ``tied_gaps`` lists indices k where eigenvalue k and k+1 are
    numerically tied (ordering between them is eigensolver-dependent).
    """

    factors: np.ndarray
    eigenvalues: np.ndarray
    n: int
    q: int
    count_above_tol: int = 0
    tied_gaps: tuple[int, ...] = ()

    @property
    def k(self) -> int:
        return int(self.eigenvalues.shape[0])


@dataclass(frozen=True, eq=False)
class RankSelection:
    """Outcome of the rank criterion C(k) = sqrt(n) log L(k) + k log n.

    ``residuals`` holds L(0)..L(K) computed from the explicit residual
    matrix; ``residuals_from_eigenvalues`` holds the same sequence via the
    identity L(k) = L(k-1) - eigenvalue_k, kept separate for
    cross-checking. ``criterion_values`` has slot k for C(k); slot 0 is
    NaN because k = 0 is never a candidate. ``degenerate_residual`` marks
    an early exit at a perfect fit, where log L(k) is not evaluable.
    """

    r_hat: int
    criterion_values: np.ndarray
    residuals: np.ndarray
    residuals_from_eigenvalues: np.ndarray = field(default_factory=lambda: np.empty(0))
    degenerate_residual: bool = False


def extract_latent_factors(y: np.ndarray, mu_tol: float = 1e-4,
                           k_max: int | None = None) -> LatentFactorSet:
    """Eigenpairs of YY'/(nq) with eigenvalue above ``mu_tol``.

    Returns at most ``k_max`` factors (default min(n, q)), eigenvalues
    descending, each eigenvector rescaled to norm sqrt(n) with its
    largest-magnitude entry made positive so repeated runs are
    reproducible.
    """
    y = _check_response(y)
    n, q = y.shape
    if not mu_tol > 0:
        raise ValidationError(f"mu_tol must be positive, got {mu_tol}")
    if k_max is None:
        k_max = min(n, q)
    if not 1 <= k_max <= min(n, q):
        raise ValidationError(f"k_max must be in [1, min(n, q)] = [1, {min(n, q)}], got {k_max}")

    m = (y @ y.T) / (n * q)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalError(f"symmetric eigensolver failed: {exc}") from exc
    w = w[::-1]
    v = v[:, ::-1]

    count_above = int(np.sum(w > mu_tol))
    k = min(count_above, k_max)
    w = w[:k].copy()
    z = v[:, :k] * np.sqrt(n)
    for j in range(k):
        i = int(np.argmax(np.abs(z[:, j])))
        if z[i, j] < 0:
            z[:, j] = -z[:, j]

    scale = max(w[0], 1.0) if k else 1.0
    ties = tuple(int(j) for j in range(k - 1) if w[j] - w[j + 1] <= _TIE_RTOL * scale)
    return LatentFactorSet(factors=z, eigenvalues=w, n=n, q=q,
                           count_above_tol=count_above, tied_gaps=ties)


def right_singular_vector(y: np.ndarray, z_k: np.ndarray) -> np.ndarray:
    """Response-side loading Y'z/n for one factor z of norm sqrt(n)."""
    y = _check_response(y)
    z_k = np.asarray(z_k, dtype=float)
    n = y.shape[0]
    if z_k.shape != (n,):
        raise ValidationError(f"factor has shape {z_k.shape}, expected ({n},)")
    nrm = np.linalg.norm(z_k)
    if abs(nrm - np.sqrt(n)) > 1e-6 * np.sqrt(n):
        raise ValidationError(f"factor norm {nrm:.6g} differs from sqrt(n) = {np.sqrt(n):.6g}")
    return y.T @ z_k / n


def select_rank(y: np.ndarray, factors: LatentFactorSet) -> RankSelection:
    """Minimize C(k) = sqrt(n) log L(k) + k log n over k = 1..K.

    L(k) is the mean squared residual of the k-factor sequential fit,
    computed both directly and through the eigenvalue identity
    L(k-1) - L(k) = eigenvalue_k. A residual at or below the perfect-fit
    level short-circuits the search with ``degenerate_residual`` set.
    """
    y = _check_response(y)
    n, q = y.shape
    if factors.n != n or factors.q != q:
        raise ValidationError(
            f"factor set was extracted from a ({factors.n}, {factors.q}) response, got ({n}, {q})")
    kk = factors.k

    resid = y.copy()
    l_direct = np.empty(kk + 1)
    l_direct[0] = np.sum(resid * resid) / (n * q)
    l_incr = np.empty(kk + 1)
    l_incr[0] = l_direct[0]
    crit = np.full(kk + 1, np.nan)

    if kk == 0:
        return RankSelection(r_hat=0, criterion_values=crit, residuals=l_direct,
                             residuals_from_eigenvalues=l_incr)

    log_n = np.log(n)
    sqrt_n = np.sqrt(n)
    perfect_level = _PERFECT_FIT_RTOL * max(l_direct[0], 1e-300)
    for k in range(1, kk + 1):
        z = factors.factors[:, k - 1]
        vk = y.T @ z / n
        resid -= np.outer(z, vk)
        l_direct[k] = np.sum(resid * resid) / (n * q)
        l_incr[k] = l_incr[k - 1] - factors.eigenvalues[k - 1]
        if l_direct[k] <= perfect_level:
            return RankSelection(r_hat=k, criterion_values=crit,
                                 residuals=l_direct[:k + 1],
                                 residuals_from_eigenvalues=l_incr[:k + 1],
                                 degenerate_residual=True)
        crit[k] = sqrt_n * np.log(l_direct[k]) + k * log_n

    r_hat = int(np.nanargmin(crit[1:])) + 1
    return RankSelection(r_hat=r_hat, criterion_values=crit, residuals=l_direct,
                         residuals_from_eigenvalues=l_incr)
