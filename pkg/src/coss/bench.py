"""Replicated benchmark harness comparing the corrected fit to the naive one.

Replicates are seeded as base_seed + index and may run in a process pool;
rows are merged by replicate index afterwards, so results do not depend
on the worker count. Wall times are the only fields that vary between
runs.
"""

from __future__ import annotations

import concurrent.futures
import csv
import time
from dataclasses import dataclass, replace

import numpy as np

from .metrics import AggregateTable, ReplicateMetrics, aggregate, nee, npe, rank_error
from .pipeline import CossFit, FitOptions, fit_coss, fit_naive
from .simulate import ScenarioConfig, generate_scenario

LONG_HEADER = ["scenario", "method", "replicate", "seed", "nee", "npe",
               "rank_error", "wall_time", "error"]
AGG_HEADER = ["scenario", "method", "replicates", "nee_mean", "nee_se", "npe_mean",
              "npe_se", "rank_error_mean", "rank_error_se"]

METHOD_COSS = "coss"
METHOD_NAIVE = "naive"


@dataclass(frozen=True)
class BenchRow:
    scenario: str
    method: str
    replicate: int
    seed: int
    nee: float = float("nan")
    npe: float = float("nan")
    rank_error: int = -1
    wall_time: float = 0.0
    error: str = ""

    @property
    def failed(self) -> bool:
        return bool(self.error)


def scenario_label(corruption: str, p: int) -> str:
    return f"{corruption}-p{p}"


def run_replicate(config: ScenarioConfig, replicate: int, opts: FitOptions) -> list[BenchRow]:
    """Fit both methods on one generated instance; failures become rows."""
    label = scenario_label(config.corruption, config.p)
    rows = []
    try:
        data = generate_scenario(config)
    except Exception as exc:  # recorded, not raised: one bad replicate must not kill the run
        msg = f"{type(exc).__name__}: {exc}"
        return [BenchRow(scenario=label, method=m, replicate=replicate,
                         seed=config.seed, error=msg)
                for m in (METHOD_COSS, METHOD_NAIVE)]
    r_star = config.r
    for method in (METHOD_COSS, METHOD_NAIVE):
        t0 = time.perf_counter()
        try:
            if method == METHOD_COSS:
                fit = fit_coss(data.y, data.w, data.model, opts)
            else:
                fit = fit_naive(data.y, data.w, opts)
            elapsed = time.perf_counter() - t0
            rows.append(BenchRow(
                scenario=label, method=method, replicate=replicate, seed=config.seed,
                nee=nee(fit.c_hat, data.c_star),
                npe=npe(fit.c_hat, data.x_test, data.y_test),
                rank_error=rank_error(fit.rank, r_star),
                wall_time=elapsed))
        except Exception as exc:
            rows.append(BenchRow(scenario=label, method=method, replicate=replicate,
                                 seed=config.seed, wall_time=time.perf_counter() - t0,
                                 error=f"{type(exc).__name__}: {exc}"))
    return rows


def _replicate_task(args) -> list[BenchRow]:
    config, replicate, opts = args
    return run_replicate(config, replicate, opts)


def run_grid(base_config: ScenarioConfig, corruptions: list[str], p_values: list[int],
             replicates: int, base_seed: int, opts: FitOptions,
             threads: int = 1) -> list[BenchRow]:
    """Benchmark every (corruption, p) cell at the given replicate count."""
    tasks = []
    for corruption in corruptions:
        for p in p_values:
            cell = replace(base_config, corruption=corruption, p=p)
            for i in range(replicates):
                tasks.append((replace(cell, seed=base_seed + i), i, opts))
    if threads > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_replicate_task, tasks))
    else:
        results = [_replicate_task(t) for t in tasks]
    rows = [row for group in results for row in group]
    rows.sort(key=lambda r: (r.scenario, r.replicate, r.method))
    return rows


def rows_to_metrics(rows: list[BenchRow]) -> list[ReplicateMetrics]:
    return [ReplicateMetrics(nee=r.nee, npe=r.npe, rank_error=r.rank_error,
                             method=r.method, replicate=r.replicate, seed=r.seed,
                             scenario=r.scenario, wall_time=r.wall_time)
            for r in rows if not r.failed]


def failed_cells(rows: list[BenchRow]) -> list[tuple[str, str]]:
    """Cells (scenario, method) in which every replicate failed."""
    status: dict[tuple[str, str], list[bool]] = {}
    for r in rows:
        status.setdefault((r.scenario, r.method), []).append(r.failed)
    return [cell for cell, flags in sorted(status.items()) if all(flags)]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_long_csv(path, rows: list[BenchRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(LONG_HEADER)
        for r in rows:
            writer.writerow([r.scenario, r.method, r.replicate, r.seed,
                             "" if r.failed else _fmt(r.nee),
                             "" if r.failed else _fmt(r.npe),
                             "" if r.failed else r.rank_error,
                             _fmt(r.wall_time), r.error])


def write_aggregate_csv(path, table: AggregateTable) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(AGG_HEADER)
        for c in table.cells:
            writer.writerow([c.scenario, c.method, c.count,
                             _fmt(c.nee_mean), "" if np.isnan(c.nee_se) else _fmt(c.nee_se),
                             _fmt(c.npe_mean), "" if np.isnan(c.npe_se) else _fmt(c.npe_se),
                             _fmt(c.rank_error_mean),
                             "" if np.isnan(c.rank_error_se) else _fmt(c.rank_error_se)])


def aggregate_rows(rows: list[BenchRow]) -> AggregateTable:
    return aggregate(rows_to_metrics(rows))
