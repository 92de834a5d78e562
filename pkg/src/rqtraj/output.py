"""Deterministic CSV/JSON writers.

All floats go out at full double precision (17 significant digits) so the
files can feed the residual validators; identical inputs produce
byte-identical files.  Header comments carry provenance (config hash etc.).
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np


def fmt(value: float) -> str:
    return f"{float(value):.16e}"


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def write_csv(path, header_comments, columns, footer_comments=()):
    """columns: list of (name, array); arrays must share a length."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = [name for name, _ in columns]
    arrays = [np.asarray(arr) for _, arr in columns]
    n = len(arrays[0]) if arrays else 0
    lines = [f"# {c}" for c in header_comments]
    lines.append(",".join(names))
    for i in range(n):
        row = []
        for arr in arrays:
            v = arr[i]
            row.append(fmt(v) if isinstance(v, (float, np.floating)) else str(v))
        lines.append(",".join(row))
    lines.extend(f"# {c}" for c in footer_comments)
    path.write_text("\n".join(lines) + "\n")


def read_csv(path):
    """Read back a write_csv file: (header dict from '# key: val', columns dict)."""
    meta = {}
    names = None
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                key, val = body.split(":", 1)
                meta[key.strip()] = val.strip()
            continue
        if names is None:
            names = line.split(",")
            continue
        rows.append(line.split(","))
    cols = {}
    for j, name in enumerate(names or []):
        vals = [r[j] for r in rows]
        try:
            cols[name] = np.array([float(v) for v in vals])
        except ValueError:
            cols[name] = np.array(vals)
    return meta, cols


def write_json(path, payload: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
