"""End-to-end sequential fit: factors, rank, surrogates, projection, layers.

The estimate is assembled one unit-rank layer at a time. Factor
extraction and rank selection read only Y; the corrupted design enters
through the surrogate moments, with the Gram surrogate projected to the
PSD cone once and shared by every layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .factors import (LatentFactorSet, RankSelection, extract_latent_factors,
                      right_singular_vector, select_rank)
from .lasso import BicTracePoint, LassoSolution, tune_lambda_bic
from .psd import AdmmSettings, PsdProjectionResult, nearest_psd_maxnorm
from .surrogates import CorruptionModel, cross_surrogate, gram_surrogate


@dataclass(frozen=True)
class FitOptions:
    mu_tol: float = 1e-4
    k_max: int | None = None
    admm: AdmmSettings = field(default_factory=AdmmSettings)
    n_lambda: int = 50
    decade_span: float = 3.0
    lasso_tol: float = 1e-9
    lasso_max_sweeps: int = 500
    kkt_tol: float = 1e-6

    def validate(self) -> None:
        if not self.mu_tol > 0:
            raise ValidationError(f"mu_tol must be positive, got {self.mu_tol}")
        if self.k_max is not None and self.k_max < 1:
            raise ValidationError(f"k_max must be >= 1, got {self.k_max}")
        if self.n_lambda < 1 or not self.decade_span > 0:
            raise ValidationError("lambda grid needs n_lambda >= 1 and decade_span > 0")
        if not (self.lasso_tol > 0 and self.kkt_tol > 0) or self.lasso_max_sweeps < 1:
            raise ValidationError("lasso tolerances must be positive and max_sweeps >= 1")
        self.admm.validate()


@dataclass(frozen=True, eq=False)
class UnitRankLayer:
    u_hat: np.ndarray
    v_hat: np.ndarray
    eigenvalue: float
    lambda_used: float
    solver_diag: LassoSolution
    tuning_trace: list[BicTracePoint]

    @property
    def matrix(self) -> np.ndarray:
        return np.outer(self.u_hat, self.v_hat)


@dataclass(frozen=True, eq=False)
class CossFit:
    layers: list[UnitRankLayer]
    c_hat: np.ndarray
    rank_selection: RankSelection
    factor_set: LatentFactorSet
    psd_diag: PsdProjectionResult | None
    model: CorruptionModel
    options: FitOptions

    @property
    def rank(self) -> int:
        return len(self.layers)

    def numerical_rank(self, rtol: float = 1e-8) -> int:
        """Rank of c_hat by singular values above rtol * largest."""
        if not np.any(self.c_hat):
            return 0
        sv = np.linalg.svd(self.c_hat, compute_uv=False)
        return int(np.sum(sv > rtol * sv[0]))


def fit_coss(y: np.ndarray, w: np.ndarray, model: CorruptionModel,
             opts: FitOptions = FitOptions()) -> CossFit:
    """Fit the sequential sparse estimate from corrupted data (Y, W)."""
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    opts.validate()
    if w.ndim != 2:
        raise ValidationError(f"design matrix must be 2-D, got shape {w.shape}")
    if y.ndim != 2 or y.shape[0] != w.shape[0]:
        raise ValidationError(
            f"response and design row counts differ: {y.shape} vs {w.shape}")
    n, q = y.shape
    p = w.shape[1]
    model.validate(p)

    factor_set = extract_latent_factors(y, mu_tol=opts.mu_tol, k_max=opts.k_max)
    rank_sel = select_rank(y, factor_set)
    r_hat = rank_sel.r_hat

    layers: list[UnitRankLayer] = []
    psd_diag: PsdProjectionResult | None = None
    c_hat = np.zeros((p, q))
    if r_hat > 0:
        sigma_pair = gram_surrogate(w, model)
        psd_diag = nearest_psd_maxnorm(sigma_pair.sigma_hat, opts.admm)
        sigma_tilde = psd_diag.sigma_tilde
        for k in range(r_hat):
            z = factor_set.factors[:, k]
            v_hat = right_singular_vector(y, z)
            rho = cross_surrogate(w, z, model)
            lam_star, sol, trace = tune_lambda_bic(
                sigma_tilde, rho, n, n_lambda=opts.n_lambda,
                decade_span=opts.decade_span, tol=opts.lasso_tol,
                max_sweeps=opts.lasso_max_sweeps, kkt_tol=opts.kkt_tol)
            layer = UnitRankLayer(u_hat=sol.u_hat, v_hat=v_hat,
                                  eigenvalue=float(factor_set.eigenvalues[k]),
                                  lambda_used=lam_star, solver_diag=sol,
                                  tuning_trace=trace)
            layers.append(layer)
            c_hat += layer.matrix

    return CossFit(layers=layers, c_hat=c_hat, rank_selection=rank_sel,
                   factor_set=factor_set, psd_diag=psd_diag, model=model,
                   options=opts)


def fit_naive(y: np.ndarray, w: np.ndarray, opts: FitOptions = FitOptions()) -> CossFit:
    """Same pipeline with corruption ignored (clean-data surrogates)."""
    return fit_coss(y, w, CorruptionModel.none(), opts)


def predict(fit: CossFit, x_new: np.ndarray) -> np.ndarray:
    """Linear predictions x_new @ c_hat."""
    x_new = np.asarray(x_new, dtype=float)
    if x_new.ndim != 2 or x_new.shape[1] != fit.c_hat.shape[0]:
        raise ValidationError(
            f"prediction input has shape {x_new.shape}, expected (*, {fit.c_hat.shape[0]})")
    return x_new @ fit.c_hat
