"""Synthetic benchmark scenarios: AR(1) designs, low-rank-plus-sparse
coefficients, correlated noise, and the three corruption mechanisms.

All randomness derives from the scenario seed through fixed sub-streams,
so changing e.g. the corruption draw leaves the design bitwise unchanged:

    stream 0: design rows        stream 3: corruption draw
    stream 1: coefficient matrix stream 4: test pair (design, then noise)
    stream 2: training noise

Each sub-stream is np.random.default_rng([seed, offset]).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ValidationError
from .surrogates import CorruptionModel

STREAM_DESIGN = 0
STREAM_COEF = 1
STREAM_NOISE = 2
STREAM_CORRUPTION = 3
STREAM_TEST = 4

CORRUPTION_KINDS = ("additive", "multiplicative", "missing")


@dataclass(frozen=True)
class ScenarioConfig:
    n: int = 200
    p: int = 200
    q: int = 300
    r: int = 10
    rho_x: float = 0.5
    tau: float = 0.2
    gamma: float = 0.1
    nnz: int = 90
    missing_prob: float = 0.1
    corruption: str = "additive"
    test_size: int = 10000
    seed: int = 0
    normalize_columns: bool = False

    def validate(self) -> None:
        if min(self.n, self.p, self.q, self.r, self.test_size) < 1:
            raise ValidationError("n, p, q, r and test_size must all be positive")
        if self.r > min(self.p, self.q):
            raise ValidationError(f"rank {self.r} exceeds min(p, q) = {min(self.p, self.q)}")
        if not self.r <= self.nnz <= self.p * self.q:
            raise ValidationError(f"nnz must lie in [r, p*q], got {self.nnz}")
        if not abs(self.rho_x) < 1:
            raise ValidationError(f"AR parameter must satisfy |rho| < 1, got {self.rho_x}")
        if self.corruption not in CORRUPTION_KINDS:
            raise ValidationError(
                f"corruption must be one of {CORRUPTION_KINDS}, got {self.corruption!r}")
        if self.corruption in ("additive", "multiplicative") and not self.tau > 0:
            raise ValidationError(f"tau must be positive, got {self.tau}")
        if not 0 <= self.missing_prob < 1:
            raise ValidationError(f"missing_prob must lie in [0, 1), got {self.missing_prob}")
        if not self.gamma > 0:
            raise ValidationError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True, eq=False)
class ScenarioDataset:
    x: np.ndarray
    w: np.ndarray
    y: np.ndarray
    c_star: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray
    model: CorruptionModel
    config: ScenarioConfig


def ar1_covariance(dim: int, rho: float) -> np.ndarray:
    """Covariance with entries rho^|i-j|."""
    if dim < 1:
        raise ValidationError(f"dimension must be positive, got {dim}")
    if not abs(rho) < 1:
        raise ValidationError(f"AR parameter must satisfy |rho| < 1, got {rho}")
    idx = np.arange(dim)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def sample_gaussian_rows(count: int, sigma: np.ndarray, scale: float, seed) -> np.ndarray:
    """``count`` i.i.d. rows from N(0, scale * sigma), Cholesky-based.

    ``seed`` is anything np.random.default_rng accepts, including an
    existing Generator (consumed in place).
    """
    if count < 1:
        raise ValidationError(f"row count must be positive, got {count}")
    if not scale > 0:
        raise ValidationError(f"scale must be positive, got {scale}")
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValidationError(f"covariance must be square, got shape {sigma.shape}")
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        scale_s = max(1.0, float(np.max(np.abs(sigma))))
        if np.linalg.eigvalsh(sigma)[0] < -1e-10 * scale_s:
            raise ValidationError("covariance is not positive semi-definite within tolerance")
        # semi-definite: tiny diagonal jitter makes the factorization exist
        jitter = 1e-12 * scale_s
        chol = np.linalg.cholesky(sigma + jitter * np.eye(sigma.shape[0]))
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, sigma.shape[0]))
    return z @ (np.sqrt(scale) * chol).T


def generate_coefficient_matrix(p: int, q: int, r: int, nnz: int, seed) -> np.ndarray:
    """Low-rank matrix with singular vectors from a sparse Gaussian draw.

    nnz standard-normal entries are placed at distinct uniform positions;
    the draw's top-r singular vectors are recombined with singular values
    100, 99, ..., 100 - r + 1 and the rest zeroed.
    """
    if r < 1 or r > min(p, q):
        raise ValidationError(f"rank must lie in [1, min(p, q)], got {r}")
    if not r <= nnz <= p * q:
        raise ValidationError(f"nnz must lie in [r, p*q], got {nnz}")
    rng = np.random.default_rng(seed)
    for attempt in range(2):
        flat = np.zeros(p * q)
        pos = rng.choice(p * q, size=nnz, replace=False)
        flat[pos] = rng.standard_normal(nnz)
        c = flat.reshape(p, q)
        u, s, vt = np.linalg.svd(c, full_matrices=False)
        numerical_rank = int(np.sum(s > s[0] * max(p, q) * np.finfo(float).eps))
        if numerical_rank >= r:
            new_s = np.zeros_like(s)
            new_s[:r] = 100.0 - np.arange(r)
            return (u * new_s) @ vt
    raise ValidationError(
        f"sparse draw has rank {numerical_rank} < r = {r} after one resample")


def corrupt_design(x: np.ndarray, corruption: str, tau: float,
                   missing_prob: float, seed) -> tuple[np.ndarray, CorruptionModel]:
    """Apply one corruption mechanism; returns (W, model with true parameters).

    Multiplicative scales are lognormal exp(N(0, tau^2)); the emitted
    model carries the analytic lognormal moments, not sample estimates.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValidationError(f"design must be 2-D, got shape {x.shape}")
    if corruption not in CORRUPTION_KINDS:
        raise ValidationError(f"corruption must be one of {CORRUPTION_KINDS}, got {corruption!r}")
    n, p = x.shape
    rng = np.random.default_rng(seed)
    if corruption == "additive":
        if not tau > 0:
            raise ValidationError(f"tau must be positive, got {tau}")
        w = x + tau * rng.standard_normal((n, p))
        model = CorruptionModel.additive(tau ** 2 * np.eye(p))
    elif corruption == "multiplicative":
        if not tau > 0:
            raise ValidationError(f"tau must be positive, got {tau}")
        m = np.exp(tau * rng.standard_normal((n, p)))
        w = x * m
        t2 = tau ** 2
        mean = np.full(p, np.exp(t2 / 2))
        var = (np.exp(t2) - 1.0) * np.exp(t2)
        model = CorruptionModel.multiplicative(mean, var * np.eye(p))
    else:
        if not 0 <= missing_prob < 1:
            raise ValidationError(f"missing_prob must lie in [0, 1), got {missing_prob}")
        observed = rng.random((n, p)) >= missing_prob
        w = x * observed
        model = CorruptionModel.missing(np.full(p, missing_prob))
    return w, model


def generate_scenario(config: ScenarioConfig) -> ScenarioDataset:
    """One full benchmark instance, deterministic in config.seed."""
    config.validate()
    n, p, q, r = config.n, config.p, config.q, config.r
    sigma_x = ar1_covariance(p, config.rho_x)
    sigma_e = ar1_covariance(q, config.rho_x)

    x = sample_gaussian_rows(n, sigma_x, 1.0, [config.seed, STREAM_DESIGN])
    c_star = generate_coefficient_matrix(p, q, r, config.nnz, [config.seed, STREAM_COEF])
    e = sample_gaussian_rows(n, sigma_e, config.gamma, [config.seed, STREAM_NOISE])

    rng_test = np.random.default_rng([config.seed, STREAM_TEST])
    x_test = sample_gaussian_rows(config.test_size, sigma_x, 1.0, rng_test)
    e_test = sample_gaussian_rows(config.test_size, sigma_e, config.gamma, rng_test)

    if config.normalize_columns:
        # theory-style design: every column rescaled to l2-norm sqrt(n),
        # coefficients rescaled inversely so Y is unchanged
        col_scale = np.linalg.norm(x, axis=0) / np.sqrt(n)
        if np.any(col_scale == 0):
            raise ValidationError("cannot normalize a design with a zero column")
        x = x / col_scale
        x_test = x_test / col_scale
        c_star = c_star * col_scale[:, None]

    y = x @ c_star + e
    y_test = x_test @ c_star + e_test
    w, model = corrupt_design(x, config.corruption, config.tau, config.missing_prob,
                              [config.seed, STREAM_CORRUPTION])
    return ScenarioDataset(x=x, w=w, y=y, c_star=c_star, x_test=x_test,
                           y_test=y_test, model=model, config=config)


def replicate_config(config: ScenarioConfig, base_seed: int, index: int) -> ScenarioConfig:
    """Per-replicate config: seed = base_seed + index, schedule-independent."""
    return replace(config, seed=base_seed + index)
