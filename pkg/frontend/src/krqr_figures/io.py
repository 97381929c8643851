"""Readers for the simulator's documented CSV/JSON result formats.

Schema problems are reported with the offending column or key by name;
nothing here ever writes back to the inputs.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """Input file does not match the documented schema."""


SERIES_COLUMNS = ("t", "engine", "mean_p", "mean_e")
FILTER_COLUMNS = ("beta", "t", "exact", "approx", "gaussian", "square")


def _check_header(header, required, path):
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(
            f"{path}: missing column '{missing[0]}' "
            f"(expected header {','.join(required)})")


def read_series_csv(path):
    """Observable series keyed by engine name.

    Returns {engine: {"t": array, "mean_p": array, "mean_e": array}} in the
    order the engines first appear.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _check_header(reader.fieldnames or [], SERIES_COLUMNS, path)
        rows = list(reader)
    out = {}
    for row in rows:
        eng = row["engine"]
        bucket = out.setdefault(eng, {"t": [], "mean_p": [], "mean_e": []})
        try:
            bucket["t"].append(int(row["t"]))
            bucket["mean_p"].append(float(row["mean_p"]))
            bucket["mean_e"].append(float(row["mean_e"]))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: malformed row {row!r}") from exc
    return {eng: {k: np.asarray(v) for k, v in cols.items()}
            for eng, cols in out.items()}


def read_filter_csv(path):
    """Filter-function samples grouped by kick count.

    Returns {t: {"beta", "exact", "approx", "gaussian", "square"}} with the
    approximation masked (NaN) where the file leaves it empty.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _check_header(reader.fieldnames or [], FILTER_COLUMNS[:3], path)
        has_approx = "approx" in (reader.fieldnames or [])
        rows = list(reader)
    grouped = {}
    for row in rows:
        t = int(row["t"])
        g = grouped.setdefault(t, {k: [] for k in FILTER_COLUMNS if k != "t"})
        g["beta"].append(float(row["beta"]))
        g["exact"].append(float(row["exact"]))
        if has_approx and row.get("approx"):
            g["approx"].append(float(row["approx"]))
        else:
            g["approx"].append(np.nan)
        for key in ("gaussian", "square"):
            g[key].append(float(row[key]) if row.get(key) else np.nan)
    return {t: {k: np.asarray(v) for k, v in g.items()}
            for t, g in sorted(grouped.items())}


def read_result_json(path):
    """Full result bundle as a dict; validates the top-level keys."""
    path = Path(path)
    with open(path) as fh:
        doc = json.load(fh)
    for key in ("config", "series", "reconstruction"):
        if key not in doc:
            raise SchemaError(f"{path}: missing top-level key '{key}'")
    return doc
