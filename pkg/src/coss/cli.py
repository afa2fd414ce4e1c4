"""Command-line harness: fit, simulate, benchmark, project-psd.

Exit codes: 0 success, 2 input validation failure, 3 numerical failure.
Every command writes the fully resolved configuration next to its outputs.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bench, config as cfgmod, matrixio
from .errors import NumericalError, ValidationError
from .pipeline import FitOptions, fit_coss
from .psd import AdmmSettings, nearest_psd_maxnorm
from .simulate import ScenarioConfig, generate_scenario
from .surrogates import CorruptionModel

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def fit_options_from_config(cfg: dict[str, str]) -> FitOptions:
    admm = AdmmSettings(penalty=cfgmod.as_float(cfg, "admm.penalty"),
                        max_iter=cfgmod.as_int(cfg, "admm.max_iter"),
                        primal_tol=cfgmod.as_float(cfg, "admm.primal_tol"),
                        dual_tol=cfgmod.as_float(cfg, "admm.dual_tol"),
                        over_relaxation=cfgmod.as_float(cfg, "admm.over_relaxation"))
    return FitOptions(mu_tol=cfgmod.as_float(cfg, "fit.mu_tol"),
                      k_max=cfgmod.as_opt_int(cfg, "fit.k_max"),
                      admm=admm,
                      n_lambda=cfgmod.as_int(cfg, "lasso.n_lambda"),
                      decade_span=cfgmod.as_float(cfg, "lasso.decade_span"),
                      lasso_tol=cfgmod.as_float(cfg, "lasso.tol"),
                      lasso_max_sweeps=cfgmod.as_int(cfg, "lasso.max_sweeps"),
                      kkt_tol=cfgmod.as_float(cfg, "lasso.kkt_tol"))


def scenario_from_config(cfg: dict[str, str]) -> ScenarioConfig:
    return ScenarioConfig(n=cfgmod.as_int(cfg, "scenario.n"),
                          p=cfgmod.as_int(cfg, "scenario.p"),
                          q=cfgmod.as_int(cfg, "scenario.q"),
                          r=cfgmod.as_int(cfg, "scenario.rank"),
                          rho_x=cfgmod.as_float(cfg, "scenario.rho_x"),
                          tau=cfgmod.as_float(cfg, "scenario.tau"),
                          gamma=cfgmod.as_float(cfg, "scenario.gamma"),
                          nnz=cfgmod.as_int(cfg, "scenario.nnz"),
                          missing_prob=cfgmod.as_float(cfg, "scenario.missing_prob"),
                          corruption=cfg["scenario.corruption"],
                          test_size=cfgmod.as_int(cfg, "scenario.test_size"),
                          seed=cfgmod.as_int(cfg, "scenario.seed"),
                          normalize_columns=cfgmod.as_bool(cfg, "scenario.normalize_columns"))


def load_corruption_model(path) -> CorruptionModel:
    """Corruption parameters from a key = value file; matrix values are
    paths to delimited files, resolved relative to the model file."""
    path = Path(path)
    kv = cfgmod.load_config_file(path)
    base = path.parent
    kind = kv.get("model")
    if kind is None:
        raise ValidationError(f"{path}: missing required key 'model'")

    def matrix(key):
        if key not in kv:
            raise ValidationError(f"{path}: {kind} model requires key {key!r}")
        return matrixio.read_matrix(base / kv[key])

    def vector(key):
        if key not in kv:
            raise ValidationError(f"{path}: {kind} model requires key {key!r}")
        return matrixio.read_vector(base / kv[key])

    if kind == "none":
        return CorruptionModel.none()
    if kind == "additive":
        return CorruptionModel.additive(matrix("noise_cov"))
    if kind == "multiplicative":
        return CorruptionModel.multiplicative(vector("scale_mean"), matrix("scale_cov"))
    if kind == "missing":
        raw = kv.get("miss_prob")
        if raw is None:
            raise ValidationError(f"{path}: missing model requires key 'miss_prob'")
        try:
            return CorruptionModel.missing(float(raw))
        except ValueError:
            return CorruptionModel.missing(matrixio.read_vector(base / raw))
    raise ValidationError(f"{path}: unknown model kind {kind!r}")


def write_corruption_model(out_dir: Path, model: CorruptionModel) -> list[str]:
    """Inverse of load_corruption_model; returns the file names written."""
    lines = [f"model = {model.kind}"]
    written = []
    if model.kind == "additive":
        matrixio.write_matrix(out_dir / "noise_cov.csv", model.noise_cov)
        lines.append("noise_cov = noise_cov.csv")
        written.append("noise_cov.csv")
    elif model.kind == "multiplicative":
        matrixio.write_matrix(out_dir / "scale_mean.csv", model.scale_mean.reshape(-1, 1))
        matrixio.write_matrix(out_dir / "scale_cov.csv", model.scale_cov)
        lines += ["scale_mean = scale_mean.csv", "scale_cov = scale_cov.csv"]
        written += ["scale_mean.csv", "scale_cov.csv"]
    elif model.kind == "missing":
        matrixio.write_matrix(out_dir / "miss_prob.csv", model.miss_prob.reshape(-1, 1))
        lines.append("miss_prob = miss_prob.csv")
        written.append("miss_prob.csv")
    (out_dir / "model.cfg").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return ["model.cfg"] + written


def _overrides(args) -> dict[str, str]:
    out = {}
    for item in args.set or []:
        if "=" not in item:
            raise ValidationError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _resolve_common(args, extra: dict[str, str]) -> dict[str, str]:
    overrides = _overrides(args)
    overrides.update(extra)
    return cfgmod.resolve(file_path=args.config, overrides=overrides)


def _prepare_out(args) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ValidationError(f"cannot create output directory {out}: {exc}") from exc
    return out


def cmd_fit(args) -> int:
    cfg = _resolve_common(args, {})
    out = _prepare_out(args)
    y = matrixio.read_matrix(args.y)
    w = matrixio.read_matrix(args.w)
    model = load_corruption_model(args.model)
    opts = fit_options_from_config(cfg)

    fit = fit_coss(y, w, model, opts)

    matrixio.write_matrix(out / "c_hat.csv", fit.c_hat)
    cfgmod.write_resolved(out / "resolved_config.cfg", cfg)
    with open(out / "diagnostics.txt", "w", encoding="utf-8") as fh:
        fh.write(f"rank_selected = {fit.rank}\n")
        fh.write(f"factors_above_tol = {fit.factor_set.count_above_tol}\n")
        fh.write(f"degenerate_residual = {fit.rank_selection.degenerate_residual}\n")
        if fit.psd_diag is not None:
            fh.write(f"psd_distance = {fit.psd_diag.max_norm_distance:.17g}\n")
            fh.write(f"psd_iterations = {fit.psd_diag.iterations}\n")
            fh.write(f"psd_converged = {fit.psd_diag.converged}\n")
        fh.write("eigenvalues = " +
                 ",".join(format(x, ".17g") for x in fit.factor_set.eigenvalues) + "\n")
        fh.write("criterion = " +
                 ",".join(format(x, ".17g") for x in fit.rank_selection.criterion_values) + "\n")
        fh.write("residuals = " +
                 ",".join(format(x, ".17g") for x in fit.rank_selection.residuals) + "\n")
        for i, layer in enumerate(fit.layers):
            fh.write(f"layer{i}.lambda = {layer.lambda_used:.17g}\n")
            fh.write(f"layer{i}.kkt_residual = {layer.solver_diag.kkt_residual:.17g}\n")
            fh.write(f"layer{i}.sweeps = {layer.solver_diag.sweeps}\n")
            fh.write(f"layer{i}.converged = {layer.solver_diag.converged}\n")
            fh.write(f"layer{i}.nonzeros = {int(np.count_nonzero(layer.u_hat))}\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    extra = {}
    if args.seed is not None:
        extra["scenario.seed"] = str(args.seed)
    if args.scenario is not None:
        extra["scenario.corruption"] = args.scenario
    if args.p is not None:
        extra["scenario.p"] = str(args.p)
    if args.normalize_columns:
        extra["scenario.normalize_columns"] = "true"
    cfg = _resolve_common(args, extra)
    out = _prepare_out(args)
    scenario = scenario_from_config(cfg)
    data = generate_scenario(scenario)

    files = {"X.csv": data.x, "W.csv": data.w, "Y.csv": data.y, "C_star.csv": data.c_star,
             "X_test.csv": data.x_test, "Y_test.csv": data.y_test}
    shapes = {}
    for name, mat in files.items():
        matrixio.write_matrix(out / name, mat)
        shapes[name] = mat.shape
    write_corruption_model(out, data.model)
    cfgmod.write_resolved(out / "resolved_config.cfg", cfg)
    matrixio.write_manifest(out / "manifest.json", shapes,
                            extra={"scenario": bench.scenario_label(scenario.corruption,
                                                                    scenario.p),
                                   "seed": scenario.seed})
    return EXIT_OK


def cmd_benchmark(args) -> int:
    extra = {}
    if args.seed is not None:
        extra["benchmark.seed"] = str(args.seed)
    if args.replicates is not None:
        extra["benchmark.replicates"] = str(args.replicates)
    if args.threads is not None:
        extra["benchmark.threads"] = str(args.threads)
    if args.scenario is not None:
        extra["benchmark.scenarios"] = args.scenario
    if args.p is not None:
        extra["benchmark.p_values"] = args.p
    cfg = _resolve_common(args, extra)
    out = _prepare_out(args)

    base_scenario = scenario_from_config(cfg)
    opts = fit_options_from_config(cfg)
    corruptions = cfgmod.as_list(cfg, "benchmark.scenarios")
    p_values = [int(tok) for tok in cfgmod.as_list(cfg, "benchmark.p_values")]
    replicates = cfgmod.as_int(cfg, "benchmark.replicates")
    base_seed = cfgmod.as_int(cfg, "benchmark.seed")
    threads = cfgmod.as_int(cfg, "benchmark.threads")
    if replicates < 1 or threads < 1:
        raise ValidationError("replicates and threads must be positive")

    rows = bench.run_grid(base_scenario, corruptions, p_values, replicates,
                          base_seed, opts, threads=threads)
    bench.write_long_csv(out / "replicates.csv", rows)
    bench.write_aggregate_csv(out / "aggregate.csv", bench.aggregate_rows(rows))
    cfgmod.write_resolved(out / "resolved_config.cfg", cfg)

    dead = bench.failed_cells(rows)
    if dead:
        print(f"all replicates failed for cells: {dead}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_project_psd(args) -> int:
    cfg = _resolve_common(args, {})
    out = _prepare_out(args)
    s = matrixio.read_matrix(args.matrix)
    settings = fit_options_from_config(cfg).admm
    result = nearest_psd_maxnorm(s, settings)
    matrixio.write_matrix(out / "projected.csv", result.sigma_tilde)
    cfgmod.write_resolved(out / "resolved_config.cfg", cfg)
    report = (f"distance = {result.max_norm_distance:.17g}, "
              f"iterations = {result.iterations}, converged = {result.converged}")
    (out / "report.txt").write_text(report + "\n", encoding="utf-8")
    print(report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coss",
        description="Sequential sparse multi-response regression under corrupted covariates")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", default=None, help="key = value config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
        sp.add_argument("--out", required=True, help="output directory")

    sp = sub.add_parser("fit", help="fit on user-provided matrices")
    common(sp)
    sp.add_argument("--y", required=True, help="response matrix file (n x q)")
    sp.add_argument("--w", required=True, help="observed design file (n x p)")
    sp.add_argument("--model", required=True, help="corruption-model parameter file")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("simulate", help="write one synthetic scenario to disk")
    common(sp)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--scenario", choices=["additive", "multiplicative", "missing"],
                    default=None, help="corruption mechanism")
    sp.add_argument("--p", type=int, default=None, help="design width")
    sp.add_argument("--normalize-columns", action="store_true",
                    help="rescale design columns to norm sqrt(n)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("benchmark", help="replicated comparison on a scenario grid")
    common(sp)
    sp.add_argument("--seed", type=int, default=None, help="base seed")
    sp.add_argument("--replicates", type=int, default=None)
    sp.add_argument("--threads", type=int, default=None, help="worker process count")
    sp.add_argument("--scenario", default=None,
                    help="comma-separated corruption mechanisms")
    sp.add_argument("--p", default=None, help="comma-separated design widths")
    sp.set_defaults(func=cmd_benchmark)

    sp = sub.add_parser("project-psd", help="max-norm nearest PSD projection of a matrix")
    common(sp)
    sp.add_argument("--matrix", required=True, help="symmetric matrix file")
    sp.set_defaults(func=cmd_project_psd)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
