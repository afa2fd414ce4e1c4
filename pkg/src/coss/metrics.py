"""Performance measures for the simulation study and their aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class ReplicateMetrics:
    nee: float
    npe: float
    rank_error: int
    method: str
    replicate: int
    seed: int
    scenario: str = ""
    wall_time: float = 0.0


@dataclass(frozen=True)
class AggregateCell:
    scenario: str
    method: str
    count: int
    nee_mean: float
    nee_se: float
    npe_mean: float
    npe_se: float
    rank_error_mean: float
    rank_error_se: float
    flagged: bool = False  # fewer than 2 replicates: standard errors omitted


@dataclass(frozen=True)
class AggregateTable:
    cells: list[AggregateCell] = field(default_factory=list)


def nee(c_hat: np.ndarray, c_star: np.ndarray) -> float:
    """Frobenius estimation error relative to the truth."""
    c_hat = np.asarray(c_hat, dtype=float)
    c_star = np.asarray(c_star, dtype=float)
    if c_hat.shape != c_star.shape:
        raise ValidationError(f"shape mismatch: {c_hat.shape} vs {c_star.shape}")
    denom = np.linalg.norm(c_star)
    if denom == 0:
        raise ValidationError("true coefficient matrix is zero; error ratio undefined")
    return float(np.linalg.norm(c_hat - c_star) / denom)


def npe(c_hat: np.ndarray, x_test: np.ndarray, y_test: np.ndarray) -> float:
    """Frobenius prediction error on a held-out pair, relative to ||Y_test||."""
    c_hat = np.asarray(c_hat, dtype=float)
    x_test = np.asarray(x_test, dtype=float)
    y_test = np.asarray(y_test, dtype=float)
    if x_test.shape[1] != c_hat.shape[0] or y_test.shape != (x_test.shape[0], c_hat.shape[1]):
        raise ValidationError(
            f"incompatible shapes: c_hat {c_hat.shape}, x_test {x_test.shape}, y_test {y_test.shape}")
    denom = np.linalg.norm(y_test)
    if denom == 0:
        raise ValidationError("test responses are zero; error ratio undefined")
    return float(np.linalg.norm(y_test - x_test @ c_hat) / denom)


def rank_error(r_hat: int, r_star: int) -> int:
    if r_hat < 0 or r_star < 0:
        raise ValidationError("ranks must be nonnegative")
    return abs(int(r_hat) - int(r_star))


def _mean_se(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    m = float(arr.mean())
    if arr.size < 2:
        return m, math.nan
    return m, float(arr.std(ddof=1) / math.sqrt(arr.size))


def aggregate(rows: list[ReplicateMetrics]) -> AggregateTable:
    """Mean and standard error per (scenario, method) cell, stably ordered."""
    groups: dict[tuple[str, str], list[ReplicateMetrics]] = {}
    for row in rows:
        groups.setdefault((row.scenario, row.method), []).append(row)
    cells = []
    for (scenario, method) in sorted(groups):
        members = groups[(scenario, method)]
        nee_m, nee_s = _mean_se([m.nee for m in members])
        npe_m, npe_s = _mean_se([m.npe for m in members])
        re_m, re_s = _mean_se([float(m.rank_error) for m in members])
        cells.append(AggregateCell(scenario=scenario, method=method, count=len(members),
                                   nee_mean=nee_m, nee_se=nee_s, npe_mean=npe_m,
                                   npe_se=npe_s, rank_error_mean=re_m, rank_error_se=re_s,
                                   flagged=len(members) < 2))
    return AggregateTable(cells=cells)
