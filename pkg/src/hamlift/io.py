"""
Plain-text artifacts: CSV tables and sorted, indented JSON.

Numbers are written with 17 significant digits so that a round trip through
text is exact; files use UTF-8 and LF line endings.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

__all__ = [
    "format_float",
    "trajectory_csv",
    "wavefunction_csv",
    "symbol_csv",
    "kernel_csv",
    "operator_json",
    "to_json",
    "write_text",
    "read_csv",
]


def format_float(v: float) -> str:
    return format(float(v), ".17g")


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) for v in row])
    return buf.getvalue()


def trajectory_csv(t, z, E=None) -> str:
    """Columns ``t, x1..xn, p1..pn`` and optionally ``E``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    z = np.asarray(z, dtype=float).reshape(t.size, -1)
    n = z.shape[1] // 2
    header = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]
    cols = [t[:, None], z]
    if E is not None:
        header.append("E")
        cols.append(np.asarray(E, dtype=float).reshape(-1, 1))
    return _table(header, np.hstack(cols))


def wavefunction_csv(psi) -> str:
    v = psi.values
    return _table(["x", "re", "im"], np.column_stack([psi.grid.x, v.real, v.imag]))


def symbol_csv(table: np.ndarray, grid) -> str:
    """Long format ``x, p, re, im`` over the phase lattice (``x`` slow)."""
    X, Pm = np.meshgrid(grid.x, grid.p, indexing="ij")
    T = np.asarray(table, dtype=complex)
    return _table(["x", "p", "re", "im"], np.column_stack([X.ravel(), Pm.ravel(), T.real.ravel(), T.imag.ravel()]))


def kernel_csv(K: np.ndarray, grid) -> str:
    X, Y = np.meshgrid(grid.x, grid.x, indexing="ij")
    K = np.asarray(K, dtype=complex)
    return _table(["x", "y", "re", "im"], np.column_stack([X.ravel(), Y.ravel(), K.real.ravel(), K.imag.ravel()]))


def operator_json(M: np.ndarray) -> list:
    """Dense complex matrix as nested lists of ``[re, im]`` pairs."""
    M = np.asarray(M, dtype=complex)
    return [[[float(c.real), float(c.imag)] for c in row] for row in M]


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        # JSON has no inf/nan; keep them readable as strings
        return v if math.isfinite(v) else repr(v)
    return obj


def to_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_text(text: str, path=None, stream=None):
    """Write to ``path`` (UTF-8, LF) or to ``stream`` when no path is given."""
    if path is None or str(path) == "-":
        stream.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def read_csv(path_or_text) -> tuple[list, np.ndarray]:
    """Header and float rows of a CSV file (or of CSV text containing a newline)."""
    text = path_or_text if "\n" in str(path_or_text) else Path(path_or_text).read_text(encoding="utf-8")
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(len(rows) - 1, -1)
