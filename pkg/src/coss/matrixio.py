"""Delimited matrix files: comma-separated, no header, 17 significant digits.

The format round-trips float64 exactly, so files written here can serve
as cross-language oracles. A JSON manifest records shapes; timestamps
live only there.
"""

from __future__ import annotations

import datetime
import json
from pathlib import Path

import numpy as np

from .errors import ValidationError


def write_matrix(path, a: np.ndarray) -> None:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    with open(path, "w", encoding="utf-8") as fh:
        for row in a:
            fh.write(",".join(format(x, ".17g") for x in row))
            fh.write("\n")


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"matrix file not found: {path}")
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = [float(tok) for tok in line.split(",")]
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: unparseable entry ({exc})") from exc
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ValidationError(
                    f"{path}:{lineno}: ragged row of width {len(row)}, expected {width}")
            rows.append(row)
    if not rows:
        raise ValidationError(f"matrix file is empty: {path}")
    return np.asarray(rows, dtype=float)


def read_vector(path) -> np.ndarray:
    """Read a one-column or one-row matrix file as a flat vector."""
    m = read_matrix(path)
    if 1 not in m.shape:
        raise ValidationError(f"{path}: expected a vector file, got shape {m.shape}")
    return m.ravel()


def write_manifest(path, entries: dict[str, tuple[int, int]], extra: dict | None = None) -> None:
    manifest = {
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "files": {name: {"rows": int(r), "cols": int(c)} for name, (r, c) in entries.items()},
    }
    if extra:
        manifest.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
