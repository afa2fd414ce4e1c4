"""Coordinate descent for the corrected quadratic lasso, and BIC tuning.

Solves min_u  0.5 u'S u - r'u + lam ||u||_1  for a PSD surrogate S. The
residual sum of squares used by the BIC rule is the corrected quantity
u'S u - 2 r'u + 1, whose constant term is ||z||^2/n = 1 for factors of
norm sqrt(n); with noisy surrogates it can go negative, so it is clipped
at ``eps_rss`` before the log and the clipping is recorded in the trace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import ValidationError

_DIAG_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class QuadraticLassoProblem:
    """Quadratic-form lasso data (S, r, lam); S must be PSD within 1e-8.

    The PSD requirement is certified upstream by the projection step;
    ``validate(check_psd=True)`` re-checks it at the cost of an
    eigendecomposition.
    """

    sigma: np.ndarray
    rho: np.ndarray
    lam: float

    def validate(self, check_psd: bool = False) -> None:
        s, r = self.sigma, self.rho
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValidationError(f"quadratic form must be square, got {s.shape}")
        if r.shape != (s.shape[0],):
            raise ValidationError(f"linear term has shape {r.shape}, expected ({s.shape[0]},)")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(r))):
            raise ValidationError("problem data contain non-finite entries")
        if self.lam < 0:
            raise ValidationError(f"l1 weight must be nonnegative, got {self.lam}")
        scale = max(1.0, np.max(np.abs(s)))
        if np.max(np.abs(s - s.T)) > 1e-8 * scale:
            raise ValidationError("quadratic form must be symmetric")
        if check_psd and np.linalg.eigvalsh(s)[0] < -1e-8 * scale:
            raise ValidationError("quadratic form is not PSD within tolerance")


@dataclass(frozen=True, eq=False)
class LassoSolution:
    u_hat: np.ndarray
    objective: float
    kkt_residual: float
    sweeps: int
    converged: bool


@dataclass(frozen=True)
class BicTracePoint:
    lam: float
    df: int
    rss: float
    bic: float
    clipped: bool
    converged: bool
    sweeps: int


@numba.njit(cache=True)
def _cd_sweeps(sigma, rho, lam, u, g, diag, tol, max_sweeps):  # pragma: no cover - jitted
    p = rho.shape[0]
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        sweeps += 1
        max_change = 0.0
        u_max = 0.0
        for j in range(p):
            dj = diag[j]
            if dj > _DIAG_FLOOR:
                uj = u[j]
                c = rho[j] - g[j] + dj * uj
                if c > lam:
                    u_new = (c - lam) / dj
                elif c < -lam:
                    u_new = (c + lam) / dj
                else:
                    u_new = 0.0
                if u_new != uj:
                    diff = u_new - uj
                    for i in range(p):
                        g[i] += sigma[i, j] * diff
                    u[j] = u_new
                    change = abs(diff)
                    if change > max_change:
                        max_change = change
            au = abs(u[j])
            if au > u_max:
                u_max = au
        if max_change <= tol * max(1.0, u_max):
            converged = True
            break
    return sweeps, converged


def objective_value(problem: QuadraticLassoProblem, u: np.ndarray) -> float:
    s, r = problem.sigma, problem.rho
    return float(0.5 * u @ s @ u - r @ u + problem.lam * np.sum(np.abs(u)))


def kkt_residual(problem: QuadraticLassoProblem, u: np.ndarray) -> float:
    """Max violation of the stationarity condition of the l1 problem."""
    u = np.asarray(u, dtype=float)
    if u.shape != problem.rho.shape:
        raise ValidationError(f"iterate has shape {u.shape}, expected {problem.rho.shape}")
    g = problem.sigma @ u - problem.rho
    active = u != 0
    res = 0.0
    if np.any(active):
        res = np.max(np.abs(g[active] + problem.lam * np.sign(u[active])))
    if np.any(~active):
        res = max(res, np.max(np.maximum(np.abs(g[~active]) - problem.lam, 0.0)))
    return float(res)


def solve_corrected_lasso(problem: QuadraticLassoProblem, tol: float = 1e-9,
                          max_sweeps: int = 500, warm_start: np.ndarray | None = None,
                          kkt_tol: float = 1e-6) -> LassoSolution:
    """Cyclic coordinate descent from an optional warm start.

    Coordinates with a (numerically) zero diagonal are frozen at zero; the
    PSD structure zeroes their whole row, so they cannot reduce the
    quadratic term, and the KKT residual reports any linear-term violation
    honestly. Convergence requires both the per-sweep coordinate-change
    test and the KKT certificate at ``kkt_tol`` relative to ||r||_inf.
    """
    problem.validate()
    if not tol > 0:
        raise ValidationError(f"tol must be positive, got {tol}")
    if max_sweeps < 1:
        raise ValidationError(f"max_sweeps must be >= 1, got {max_sweeps}")
    p = problem.rho.shape[0]
    sigma = np.ascontiguousarray(problem.sigma)
    diag = np.ascontiguousarray(np.diag(sigma))
    if warm_start is None:
        u = np.zeros(p)
    else:
        u = np.asarray(warm_start, dtype=float).copy()
        if u.shape != (p,):
            raise ValidationError(f"warm start has shape {u.shape}, expected ({p},)")
        u[diag <= _DIAG_FLOOR] = 0.0
    g = sigma @ u

    kkt_scale = max(1.0, float(np.max(np.abs(problem.rho))) if p else 1.0)
    total_sweeps = 0
    converged = False
    cur_tol = tol
    while total_sweeps < max_sweeps:
        sweeps, coord_conv = _cd_sweeps(sigma, problem.rho, problem.lam, u, g, diag,
                                        cur_tol, max_sweeps - total_sweeps)
        total_sweeps += sweeps
        if not coord_conv:
            break
        kkt = float(_kkt_from_gradient(g - problem.rho, u, problem.lam))
        if kkt <= kkt_tol * kkt_scale:
            converged = True
            break
        cur_tol /= 10.0  # stationary to coordinate tolerance but not KKT: tighten

    kkt = float(_kkt_from_gradient(g - problem.rho, u, problem.lam))
    if converged:
        converged = kkt <= kkt_tol * kkt_scale
    return LassoSolution(u_hat=u, objective=objective_value(problem, u),
                         kkt_residual=kkt, sweeps=total_sweeps, converged=converged)


def _kkt_from_gradient(g: np.ndarray, u: np.ndarray, lam: float) -> float:
    active = u != 0
    res = 0.0
    if np.any(active):
        res = np.max(np.abs(g[active] + lam * np.sign(u[active])))
    if np.any(~active):
        res = max(res, np.max(np.maximum(np.abs(g[~active]) - lam, 0.0)))
    return res


def tune_lambda_bic(sigma_tilde: np.ndarray, rho_tilde: np.ndarray, n: int,
                    n_lambda: int = 50, decade_span: float = 3.0,
                    tol: float = 1e-9, max_sweeps: int = 500, kkt_tol: float = 1e-6,
                    eps_rss: float = 1e-12):
    """Warm-started geometric lambda path, selected by BIC.

    BIC(lam) = n log(max(rss, eps_rss)) + df log n with df the nonzero
    count. Returns (lambda_star, solution at lambda_star, trace); ties
    resolve to the largest lambda.
    """
    sigma_tilde = np.asarray(sigma_tilde, dtype=float)
    rho_tilde = np.asarray(rho_tilde, dtype=float)
    if n_lambda < 1:
        raise ValidationError(f"n_lambda must be >= 1, got {n_lambda}")
    if not decade_span > 0:
        raise ValidationError(f"decade_span must be positive, got {decade_span}")
    if n < 2:
        raise ValidationError(f"sample count must be >= 2, got {n}")

    p = rho_tilde.shape[0]
    lam_max = float(np.max(np.abs(rho_tilde))) if p else 0.0
    if lam_max <= 0.0:
        problem = QuadraticLassoProblem(sigma=sigma_tilde, rho=rho_tilde, lam=0.0)
        problem.validate()
        sol = LassoSolution(u_hat=np.zeros(p), objective=0.0, kkt_residual=0.0,
                            sweeps=0, converged=True)
        trace = [BicTracePoint(lam=0.0, df=0, rss=1.0, bic=0.0, clipped=False,
                               converged=True, sweeps=0)]
        return 0.0, sol, trace

    grid = np.geomspace(lam_max, lam_max / 10.0 ** decade_span, n_lambda)
    log_n = np.log(n)
    trace: list[BicTracePoint] = []
    best_idx = -1
    best_bic = np.inf
    best_sol = None
    warm = None
    for lam in grid:
        problem = QuadraticLassoProblem(sigma=sigma_tilde, rho=rho_tilde, lam=float(lam))
        sol = solve_corrected_lasso(problem, tol=tol, max_sweeps=max_sweeps,
                                    warm_start=warm, kkt_tol=kkt_tol)
        warm = sol.u_hat
        rss = float(sol.u_hat @ sigma_tilde @ sol.u_hat - 2.0 * rho_tilde @ sol.u_hat + 1.0)
        clipped = rss < eps_rss
        df = int(np.count_nonzero(sol.u_hat))
        bic = n * np.log(max(rss, eps_rss)) + df * log_n
        trace.append(BicTracePoint(lam=float(lam), df=df, rss=rss, bic=float(bic),
                                   clipped=clipped, converged=sol.converged,
                                   sweeps=sol.sweeps))
        if bic < best_bic:
            best_bic = bic
            best_idx = len(trace) - 1
            best_sol = sol
    return float(grid[best_idx]), best_sol, trace
