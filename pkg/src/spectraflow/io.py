"""CSV matrices and JSON family configs."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import jsonschema
import numpy as np

from .family import OperatorFamily
from .model_spectra import synthetic_family

FAMILY_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["explicit-samples", "linear-pencil", "rotating-eigenbundle", "seeded-random-path"]},
        "dim": {"type": "integer", "minimum": 1},
        "params": {"type": "object"},
        "samples": {"type": "integer", "minimum": 1},
        "seed": {"type": ["integer", "null"]},
    },
    "required": ["kind"],
    "additionalProperties": False,
}


def read_matrix(source) -> np.ndarray:
    """Matrix from CSV text or a path: one row per line, ``#`` lines ignored."""
    text = Path(source).read_text() if not isinstance(source, str) or "\n" not in source else source
    rows = [r for r in csv.reader(ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#"))]
    M = np.array([[float(x) for x in r] for r in rows], dtype=float)
    if M.ndim != 2:
        raise ValueError("ragged matrix CSV")
    return M


def matrix_to_csv(M: np.ndarray, header: str | None = None) -> str:
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    writer = csv.writer(buf, lineterminator="\n")
    for row in np.asarray(M, dtype=float):
        writer.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def family_from_config(cfg: dict) -> OperatorFamily:
    """Build a family from ``{kind, dim, params, samples, seed}``; ``samples`` is left to the caller."""
    jsonschema.validate(cfg, FAMILY_SCHEMA)
    params = dict(cfg.get("params") or {})
    if "dim" in cfg:
        params.setdefault("dim", cfg["dim"])
    fam = synthetic_family(cfg["kind"], params, cfg.get("seed"))
    if "dim" in cfg and fam.dim != cfg["dim"] and not params.get("doubled"):
        raise jsonschema.ValidationError(f"dim {cfg['dim']} does not match family dimension {fam.dim}")
    return fam


def load_family(source) -> tuple[OperatorFamily, dict]:
    cfg = source if isinstance(source, dict) else json.loads(Path(source).read_text())
    return family_from_config(cfg), cfg
