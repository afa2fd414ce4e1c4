"""Flat key = value configuration with dotted section keys.

Files look like

    scenario.p = 200
    admm.penalty = 0.25   # comments allowed

Every run starts from documented defaults, applies the config file, then
command-line overrides, and writes the fully resolved mapping back out
for provenance.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ValidationError

DEFAULTS: dict[str, str] = {
    # fit options
    "fit.mu_tol": "1e-4",
    "fit.k_max": "",  # empty: min(n, q)
    "admm.penalty": "0.25",
    "admm.max_iter": "2000",
    "admm.primal_tol": "1e-6",
    "admm.dual_tol": "1e-6",
    "admm.over_relaxation": "1.6",
    "lasso.n_lambda": "50",
    "lasso.decade_span": "3",
    "lasso.tol": "1e-9",
    "lasso.max_sweeps": "500",
    "lasso.kkt_tol": "1e-6",
    # scenario
    "scenario.n": "200",
    "scenario.p": "200",
    "scenario.q": "300",
    "scenario.rank": "10",
    "scenario.rho_x": "0.5",
    "scenario.tau": "0.2",
    "scenario.gamma": "0.1",
    "scenario.nnz": "90",
    "scenario.missing_prob": "0.1",
    "scenario.corruption": "additive",
    "scenario.test_size": "10000",
    "scenario.seed": "0",
    "scenario.normalize_columns": "false",
    # benchmark
    "benchmark.replicates": "50",
    "benchmark.seed": "0",
    "benchmark.threads": "1",
    "benchmark.scenarios": "additive",
    "benchmark.p_values": "200",
}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config_file(path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"), source=str(path))


def resolve(file_path=None, overrides: dict[str, str] | None = None,
            defaults: dict[str, str] | None = None) -> dict[str, str]:
    """defaults < config file < explicit overrides; unknown keys rejected."""
    merged = dict(DEFAULTS if defaults is None else defaults)
    for layer in (load_config_file(file_path) if file_path else {}, overrides or {}):
        for key, value in layer.items():
            if key not in merged:
                raise ValidationError(f"unknown config key {key!r}")
            merged[key] = value
    return merged


def write_resolved(path, cfg: dict[str, str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key in sorted(cfg):
            fh.write(f"{key} = {cfg[key]}\n")


def as_int(cfg: dict[str, str], key: str) -> int:
    try:
        return int(cfg[key])
    except ValueError as exc:
        raise ValidationError(f"config key {key} = {cfg[key]!r} is not an integer") from exc


def as_float(cfg: dict[str, str], key: str) -> float:
    try:
        return float(cfg[key])
    except ValueError as exc:
        raise ValidationError(f"config key {key} = {cfg[key]!r} is not a number") from exc


def as_bool(cfg: dict[str, str], key: str) -> bool:
    value = cfg[key].lower()
    if value in ("true", "1", "yes"):
        return True
    if value in ("false", "0", "no"):
        return False
    raise ValidationError(f"config key {key} = {cfg[key]!r} is not a boolean")


def as_opt_int(cfg: dict[str, str], key: str) -> int | None:
    return None if cfg[key] == "" else as_int(cfg, key)


def as_list(cfg: dict[str, str], key: str) -> list[str]:
    return [tok.strip() for tok in cfg[key].split(",") if tok.strip()]
