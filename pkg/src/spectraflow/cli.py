"""Command line front end.

Each subcommand parses its arguments into a params dict and calls a handler
that returns the output text. ``spectraflow run --config exp.json`` takes the
same params from an experiment file. Exit codes: 0 on success, 2 for bad
arguments or configs, 3 when a numerical check refuses the input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from .bundle import lasso_certificate
from .errors import SpectralError
from .family import ENDPOINT_ZERO_TOL, kato_constants, spectral_flow, track_branches, verify_growth_bound
from .identification import MetricPair, identification_report
from .io import load_family, matrix_to_csv, read_matrix
from .model_spectra import sphere_spectrum
from .projection import ENDPOINT_TOL, project_contour, project_direct
from .spectrum import SpectrumWindow, align

_interval = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_family = {"type": ["string", "object"]}

PARAM_SCHEMAS = {
    "sphere-spectrum": {
        "properties": {"dim": {"type": "integer", "minimum": 2}, "levels": {"type": "integer", "minimum": 1},
                       "format": {"enum": ["csv", "json"]}},
        "required": ["dim", "levels"],
    },
    "flow": {
        "properties": {"family": _family, "samples": {"type": "integer", "minimum": 2},
                       "method": {"enum": ["shift-align", "zero-crossing", "both"]}},
        "required": ["family"],
    },
    "lasso": {
        "properties": {"family": _family, "interval": _interval, "samples": {"type": "integer", "minimum": 2}},
        "required": ["family", "interval"],
    },
    "align": {
        "properties": {"u": {"type": "string"}, "v": {"type": "string"},
                       "max_shift": {"type": "integer", "minimum": 0},
                       "min_overlap": {"type": "integer", "minimum": 1}},
        "required": ["u", "v"],
    },
    "project": {
        "properties": {"matrix": {"type": "string"}, "interval": _interval,
                       "method": {"enum": ["direct", "contour"]}, "nodes": {"type": "integer", "minimum": 8},
                       "sidecar": {"type": ["string", "null"]}},
        "required": ["matrix", "interval"],
    },
    "kato-check": {
        "properties": {"family": _family, "samples": {"type": "integer", "minimum": 2},
                       "eps": {"type": "number", "exclusiveMinimum": 0}},
        "required": ["family"],
    },
    "identify": {
        "properties": {"g": {"type": "string"}, "h": {"type": "string"}},
        "required": ["g", "h"],
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "command": {"enum": sorted(PARAM_SCHEMAS)},
        "params": {"type": "object"},
        "seed": {"type": ["integer", "null"]},
        "output": {"type": ["string", "null"]},
    },
    "required": ["command", "params"],
    "additionalProperties": False,
}


def _family(spec, seed=None):
    if isinstance(spec, dict) and seed is not None and "seed" not in spec:
        spec = {**spec, "seed": seed}
    return load_family(spec)


def run_sphere_spectrum(p, seed=None) -> str:
    w = sphere_spectrum(p["dim"], p["levels"])
    if p.get("format", "csv") == "json":
        return json.dumps({"operation": "sphere-spectrum", "dim": p["dim"], "levels": p["levels"],
                           "j_lo": w.j_lo, "values": list(w.values)}, sort_keys=True) + "\n"
    return w.to_csv(f"sphere-spectrum dim={p['dim']} levels={p['levels']} tolerance=exact")


def run_flow(p, seed=None) -> str:
    fam, cfg = _family(p["family"], seed)
    samples = p.get("samples") or cfg.get("samples") or 200
    method = p.get("method", "both")
    methods = ["shift-align", "zero-crossing"] if method == "both" else [method]
    rows = [(m, spectral_flow(fam, samples, m)) for m in methods]
    if method == "both" and rows[0][1] != rows[1][1]:
        raise SpectralError(f"spectral flow methods disagree: {dict(rows)}")
    out = [f"# flow samples={samples} endpoint_tol={ENDPOINT_ZERO_TOL:g} overlap_floor=0.1", "method,flow"]
    out += [f"{m},{v}" for m, v in rows]
    return "\n".join(out) + "\n"


def run_lasso(p, seed=None) -> str:
    fam, cfg = _family(p["family"], seed)
    samples = p.get("samples") or cfg.get("samples") or 64
    cert = lasso_certificate(fam, p["interval"], samples)
    return cert.to_json() + "\n"


def run_align(p, seed=None) -> str:
    u = SpectrumWindow.from_csv(Path(p["u"]).read_text())
    v = SpectrumWindow.from_csv(Path(p["v"]).read_text())
    max_shift = p.get("max_shift", max(len(u), len(v)))
    res = align(u, v, max_shift, p.get("min_overlap", 1))
    return json.dumps({"operation": "align", "shift": res.shift, "distance": res.distance,
                       "overlap_count": res.overlap_count, "tolerance": 1e-12}, sort_keys=True) + "\n"


def run_project(p, seed=None) -> str:
    T = read_matrix(p["matrix"])
    method = p.get("method", "direct")
    nodes = p.get("nodes", 64)
    proj = project_direct(T, p["interval"]) if method == "direct" else project_contour(T, p["interval"], nodes)
    sidecar = proj.sidecar()
    if p.get("sidecar"):
        Path(p["sidecar"]).write_text(sidecar + "\n")
    head = f"project method={method} nodes={nodes if method == 'contour' else '-'} endpoint_tol={ENDPOINT_TOL:g} {sidecar}"
    return matrix_to_csv(proj.P, head)


def run_kato_check(p, seed=None) -> str:
    fam, cfg = _family(p["family"], seed)
    samples = p.get("samples") or cfg.get("samples") or 100
    eps = p.get("eps", 0.1)
    k = kato_constants(fam)
    rep = verify_growth_bound(track_branches(fam, samples), k, eps)
    rows = [("alpha", k.alpha), ("beta", k.beta), ("c", k.c), ("c1", k.c1), ("c2", k.c2),
            ("delta", rep.delta), ("eps", eps), ("max_ratio", rep.max_ratio),
            ("violations", rep.violations), ("max_arsinh_step", rep.max_arsinh_step)]
    out = [f"# kato-check samples={samples} slack=1e-9", "quantity,value"]
    out += [f"{name},{val!r}" for name, val in rows]
    return "\n".join(out) + "\n"


def run_identify(p, seed=None) -> str:
    rep = identification_report(MetricPair(read_matrix(p["g"]), read_matrix(p["h"])))
    return json.dumps({"operation": "identify", "a": rep["a"].tolist(), "b": rep["b"].tolist(),
                       "f": rep["f"], "residuals": rep["residuals"]}, sort_keys=True, indent=1) + "\n"


HANDLERS = {
    "sphere-spectrum": run_sphere_spectrum,
    "flow": run_flow,
    "lasso": run_lasso,
    "align": run_align,
    "project": run_project,
    "kato-check": run_kato_check,
    "identify": run_identify,
}


def validate_config(cfg: dict) -> None:
    jsonschema.validate(cfg, CONFIG_SCHEMA)
    schema = {"type": "object", "additionalProperties": False, **PARAM_SCHEMAS[cfg["command"]]}
    jsonschema.validate(cfg["params"], schema)


def dispatch(cfg: dict) -> str:
    validate_config(cfg)
    return HANDLERS[cfg["command"]](cfg["params"], cfg.get("seed"))


def _interval_arg(text):
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}") from None
    return [lo, hi]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spectraflow", description=__doc__.splitlines()[0])
    ap.add_argument("--output", "-o", help="write to this file instead of stdout")
    ap.add_argument("--seed", type=int)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sphere-spectrum", help="Dirac spectrum of the round sphere")
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--levels", type=int, required=True)
    s.add_argument("--format", choices=["csv", "json"], default="csv")

    s = sub.add_parser("flow", help="spectral flow of a family")
    s.add_argument("--family", required=True)
    s.add_argument("--samples", type=int)
    s.add_argument("--method", choices=["shift-align", "zero-crossing", "both"], default="both")

    s = sub.add_parser("lasso", help="orientation certificate of an interval eigenbundle")
    s.add_argument("--family", required=True)
    s.add_argument("--interval", type=_interval_arg, required=True)
    s.add_argument("--samples", type=int)

    s = sub.add_parser("align", help="best index shift between two spectrum windows")
    s.add_argument("--u", required=True)
    s.add_argument("--v", required=True)
    s.add_argument("--max-shift", type=int)
    s.add_argument("--min-overlap", type=int, default=1)

    s = sub.add_parser("project", help="interval spectral projector of a matrix")
    s.add_argument("--matrix", required=True)
    s.add_argument("--interval", type=_interval_arg, required=True)
    s.add_argument("--method", choices=["direct", "contour"], default="direct")
    s.add_argument("--nodes", type=int, default=64)
    s.add_argument("--sidecar")

    s = sub.add_parser("kato-check", help="eigenvalue growth bound for a linear pencil")
    s.add_argument("--family", required=True)
    s.add_argument("--samples", type=int)
    s.add_argument("--eps", type=float, default=0.1)

    s = sub.add_parser("identify", help="identification maps between two inner products")
    s.add_argument("--g", required=True)
    s.add_argument("--h", required=True)

    s = sub.add_parser("run", help="run an experiment config file")
    s.add_argument("--config", required=True)
    return ap


def _args_to_config(ns) -> dict:
    params = {k: v for k, v in vars(ns).items()
              if k not in ("command", "output", "seed") and v is not None}
    return {"command": ns.command, "params": params, "seed": ns.seed, "output": ns.output}


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        if ns.command == "run":
            cfg = json.loads(Path(ns.config).read_text())
        else:
            cfg = _args_to_config(ns)
        text = dispatch(cfg)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        print(f"spectraflow: invalid config at {where}: {exc.message}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        if isinstance(exc, SpectralError):
            print(str(exc), file=sys.stderr)
            return 3
        print(f"spectraflow: {exc}", file=sys.stderr)
        return 2
    out = cfg.get("output") or ns.output
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
