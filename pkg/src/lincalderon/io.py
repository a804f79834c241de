"""Deterministic output writers: CSV with 17 significant digits, JSON, sidecars."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .symbols import SymbolTable


def _num(x) -> str:
    return f"{float(x):.17g}"


def to_jsonable(obj):
    """Convert numpy and complex values to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, data) -> Path:
    path = Path(path)
    path.write_text(json.dumps(to_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


def complex_matrix_dict(M) -> dict:
    M = np.asarray(M, dtype=complex)
    return {"shape": list(M.shape), "re": M.real.tolist(), "im": M.imag.tolist()}


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else _num(v) for v in row])
    return path


def write_symbol_table(path, table: SymbolTable) -> Path:
    rows = ((yp, t, table.values[i, k].real, table.values[i, k].imag)
            for i, yp in enumerate(table.boundary_points) for k, t in enumerate(table.frequencies))
    return write_rows(path, ["y_prime", "tau", "re", "im"], rows)


def read_symbol_table(path) -> SymbolTable:
    """Load a table written by :func:`write_symbol_table` (treated as exact samples)."""
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        if r.fieldnames != ["y_prime", "tau", "re", "im"]:
            raise ValueError(f"unexpected CSV header {r.fieldnames}")
        rows = [(float(d["y_prime"]), float(d["tau"]), complex(float(d["re"]), float(d["im"]))) for d in r]
    pts = sorted({p for p, _, _ in rows})
    taus = sorted({t for _, t, _ in rows})
    vals = np.full((len(pts), len(taus)), np.nan, dtype=complex)
    pi = {p: i for i, p in enumerate(pts)}
    ti = {t: i for i, t in enumerate(taus)}
    for p, t, v in rows:
        vals[pi[p], ti[t]] = v
    if np.isnan(vals.real).any():
        raise ValueError("symbol table CSV is not a full (point, frequency) grid")
    return SymbolTable(pts, taus, vals)


def config_hash(config_dict: dict) -> str:
    blob = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def write_sidecar(path, config_digest: str, command: str) -> Path:
    """``<file>.meta.json`` recording the config hash of a data file."""
    path = Path(path)
    side = path.with_name(path.name + ".meta.json")
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    side.write_text(json.dumps({"command": command, "config_sha256": config_digest,
                                "file": path.name, "file_sha256": digest}, indent=2, sort_keys=True) + "\n")
    return side
