"""Batch front end.

Each subcommand reads a JSON config (``--config``), validates it against a
schema before doing any work, and writes JSON or grid-file output under
``--out``.  Failures produce one JSON error record on stderr (and in
``<out>/error.json``) with a distinct exit code.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import jsonschema

from . import harness, oracles
from .grid import GridSpec, descriptor_from_dict, load_grid, sample, save_grid
from .integral import KernelDescriptor, fractional_integral, singular_integral
from .maximal import (AxisOrder, MaximalConfig, directional_maximal, hl_maximal, iterated_maximal,
                      strong_maximal)
from .mixed_norms import (AdmissibilityError, CubeFamily, ExponentVector, MorreyParams,
                          classical_morrey_norm, equivalent_morrey_norm, mixed_lebesgue_norm,
                          mixed_morrey_norm, norm_record, parse_exponent, weighted_lp_norm)
from .reports import jsonable, write_reports
from .weights import Weight1D, a1_constant, ap_constant

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_ADMISSIBILITY, EXIT_VERIFY = 0, 2, 3, 4, 5

log = logging.getLogger("mixedmorrey")


class ConfigError(Exception):
    pass


# {{{ schemas

_EXP = {"oneOf": [{"type": "number"}, {"type": "string"}]}
_EXPVEC = {"oneOf": [_EXP, {"type": "array", "items": _EXP, "minItems": 1}]}
_VEC = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_GRID = {
    "type": "object",
    "required": ["lo", "hi", "h"],
    "properties": {"lo": _VEC, "hi": _VEC, "h": {"oneOf": [{"type": "number", "exclusiveMinimum": 0}, _VEC]}},
}
_INPUT = {
    "type": "object",
    "oneOf": [
        {"required": ["file"], "properties": {"file": {"type": "string"}}},
        {"required": ["function", "grid"],
         "properties": {"function": {"type": "object", "required": ["kind"]}, "grid": _GRID}},
        {"required": ["oracle", "grid"],
         "properties": {"oracle": {"enum": ["triangle", "stockert"]}, "grid": _GRID,
                        "q1": {"type": "number"}, "q2": {"type": "number"}}},
    ],
}
_FAMILY = {"oneOf": [{"enum": ["exact", "dyadic"]},
                     {"type": "object", "properties": {"strategy": {"enum": ["exact", "dyadic", "explicit"]},
                                                       "cubes": {"type": "array"}}}]}
_COMMON = {"seed": {"type": "integer"}, "workers": {"type": "integer", "minimum": 1}}

SCHEMAS = {
    "norm": {
        "type": "object",
        "required": ["input", "kind"],
        "properties": {
            "input": _INPUT,
            "kind": {"enum": ["mixed_lebesgue", "mixed_morrey", "classical_morrey", "equivalent_morrey",
                              "weighted_lp"]},
            "p": _EXPVEC, "q": _EXPVEC, "eta": {"type": "number"}, "family": _FAMILY,
            "weight": _INPUT, **_COMMON,
        },
    },
    "maxop": {
        "type": "object",
        "required": ["input", "op"],
        "properties": {
            "input": _INPUT,
            "op": {"enum": ["directional", "iterated", "hl", "strong"]},
            "axis": {"type": "integer", "minimum": 1},
            "axis_order": {"type": "array", "items": {"type": "integer"}},
            "t": {"type": "number", "exclusiveMinimum": 0},
            "algorithm": {"enum": ["exact-quadratic", "pruned"]},
            "mode": {"enum": ["exact", "sandwich"]},
            "format": {"enum": ["binary", "csv"]}, **_COMMON,
        },
    },
    "frac": {
        "type": "object",
        "required": ["input", "alpha"],
        "properties": {
            "input": _INPUT, "alpha": {"type": "number"},
            "quadrature": {"enum": ["midpoint", "cell-exact"]},
            "radius": {"type": "number", "exclusiveMinimum": 0},
            "part": {"enum": ["full", "near", "far"]},
            "format": {"enum": ["binary", "csv"]}, **_COMMON,
        },
    },
    "singular": {
        "type": "object",
        "required": ["input", "kernel"],
        "properties": {
            "input": _INPUT,
            "kernel": {"type": "object", "required": ["kind"]},
            "format": {"enum": ["binary", "csv"]}, **_COMMON,
        },
    },
    "weights": {
        "type": "object",
        "required": ["weight", "grid", "constant"],
        "properties": {
            "weight": {"type": "object", "required": ["kind"]},
            "grid": _GRID,
            "constant": {"enum": ["ap", "a1"]},
            "p": _EXP, "family": _FAMILY, **_COMMON,
        },
    },
    "verify": {
        "type": "object",
        "properties": {
            "checks": {"type": "array", "items": {"type": "string"}},
            "count": {"type": "integer", "minimum": 1}, **_COMMON,
        },
    },
    "oracle-dump": {"type": "object", "properties": _COMMON},
}

DEFAULT_CONFIGS = {"verify": {}, "oracle-dump": {}}

# }}}


def _load_config(cmd: str, path: str | None) -> dict:
    if path is None:
        if cmd not in DEFAULT_CONFIGS:
            raise ConfigError(f"subcommand {cmd!r} needs --config")
        cfg = dict(DEFAULT_CONFIGS[cmd])
    else:
        try:
            text = Path(path).read_text()
        except OSError:
            raise
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from e
    cfg.pop("command", None)
    jsonschema.validate(cfg, SCHEMAS[cmd])
    return cfg


def _grid_from(d: dict) -> GridSpec:
    return GridSpec.box(d["lo"], d["hi"], d["h"])


def _input(d: dict):
    if "file" in d:
        return load_grid(d["file"])
    grid = _grid_from(d["grid"])
    if "oracle" in d:
        if d["oracle"] == "triangle":
            desc = oracles.triangle_example().sampler
        else:
            desc = oracles.stockert_counterexample(d.get("q1", 2.0), d.get("q2", 0.75)).sampler
        return sample(desc, grid)
    try:
        desc = descriptor_from_dict(d["function"])
    except KeyError as e:
        raise ConfigError(f"function descriptor is missing field {e}") from e
    return sample(desc, grid)


def _family(cfg) -> CubeFamily:
    return CubeFamily.from_json(cfg.get("family", "dyadic"))


def _exp(v):
    return parse_exponent(v)


def _expvec(v, n):
    return ExponentVector.of(v if not isinstance(v, list) else [parse_exponent(x) for x in v], n)


def _write_json(out: Path, name: str, payload) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(json.dumps(jsonable(payload), indent=2, sort_keys=True))
    return path


def cmd_norm(cfg: dict, out: Path, args) -> int:
    f = _input(cfg["input"])
    kind = cfg["kind"]
    n = f.dim
    cube = None
    if kind == "mixed_lebesgue":
        pv = _expvec(cfg.get("p", 2.0), n)
        value = mixed_lebesgue_norm(f, pv)
        rec = norm_record(kind, pv, {}, value)
    elif kind == "weighted_lp":
        if "weight" not in cfg:
            raise ConfigError("weighted_lp needs a weight input")
        p = _exp(cfg.get("p", 2.0))
        value = weighted_lp_norm(f, p, _input(cfg["weight"]))
        rec = norm_record(kind, [p], {}, value)
    else:
        if "p" not in cfg or "q" not in cfg:
            raise ConfigError(f"{kind} needs both p and q")
        p = _exp(cfg["p"])
        fam = _family(cfg)
        if kind == "classical_morrey":
            q = _exp(cfg["q"])
            value = classical_morrey_norm(f, p, q, fam)
            rec = norm_record(kind, {"p": p, "q": q}, {"family": fam.to_json()}, value)
        else:
            params = MorreyParams(p, _expvec(cfg["q"], n))
            if kind == "mixed_morrey":
                value, cube = mixed_morrey_norm(f, params, fam)
                rec = norm_record(kind, params, {"family": fam.to_json()}, value, cube)
            else:
                if "eta" not in cfg:
                    raise ConfigError("equivalent_morrey needs eta")
                value = equivalent_morrey_norm(f, params, float(cfg["eta"]), fam)
                rec = norm_record(kind, params, {"family": fam.to_json(), "eta": cfg["eta"]}, value)
    path = _write_json(out, "norm.json", rec)
    print(json.dumps(jsonable({"value": rec["value"], "argmax_cube": rec["argmax_cube"], "file": str(path)}),
                     sort_keys=True))
    return EXIT_OK


def _save(out: Path, name: str, g, fmt: str) -> int:
    out.mkdir(parents=True, exist_ok=True)
    path = save_grid(out / f"{name}.json", g, fmt)
    print(json.dumps({"file": str(path), "shape": list(g.shape)}))
    return EXIT_OK


def cmd_maxop(cfg: dict, out: Path, args) -> int:
    f = _input(cfg["input"])
    op = cfg["op"]
    alg = cfg.get("algorithm", "exact-quadratic")
    if op == "directional":
        g = directional_maximal(f, int(cfg.get("axis", 1)), alg)
    elif op == "iterated":
        order = AxisOrder(tuple(cfg["axis_order"])) if "axis_order" in cfg else None
        if order is not None and len(order) != f.dim:
            raise ConfigError(f"axis order {order.axes} does not match dimension {f.dim}")
        g = iterated_maximal(f, MaximalConfig(t=float(cfg.get("t", 1.0)), order=order, algorithm=alg))
    elif op == "hl":
        g = hl_maximal(f)
    else:
        res = strong_maximal(f, cfg.get("mode", "exact"))
        if isinstance(res, tuple):
            _save(out, "maxop_lower", res.lower, cfg.get("format", "binary"))
            return _save(out, "maxop_upper", res.upper, cfg.get("format", "binary"))
        g = res
    return _save(out, "maxop", g, cfg.get("format", "binary"))


def cmd_frac(cfg: dict, out: Path, args) -> int:
    f = _input(cfg["input"])
    g = fractional_integral(f, float(cfg["alpha"]), quadrature=cfg.get("quadrature", "midpoint"),
                            radius=cfg.get("radius"), part=cfg.get("part", "full"))
    return _save(out, "frac", g, cfg.get("format", "binary"))


def cmd_singular(cfg: dict, out: Path, args) -> int:
    f = _input(cfg["input"])
    kernel = KernelDescriptor.from_json(cfg["kernel"])
    return _save(out, "singular", singular_integral(f, kernel), cfg.get("format", "binary"))


def cmd_weights(cfg: dict, out: Path, args) -> int:
    grid = _grid_from(cfg["grid"])
    w = Weight1D.from_json(cfg["weight"])
    fam = _family(cfg)
    if cfg["constant"] == "ap":
        p = _exp(cfg.get("p", 2.0))
        value = ap_constant(w, p, fam, grid)
        rec = {"constant": "ap", "p": p, "value": value}
    else:
        value = a1_constant(w, fam, grid)
        rec = {"constant": "a1", "value": value}
    rec.update({"weight": w.to_json(), "family": fam.to_json(), "grid": grid.to_dict()})
    _write_json(out, "weights.json", rec)
    print(json.dumps(jsonable(rec), sort_keys=True))
    return EXIT_OK


def cmd_verify(cfg: dict, out: Path, args) -> int:
    names = cfg.get("checks")
    if names is not None and not names:
        raise ConfigError("empty check list")
    try:
        reports = harness.run_checks(names, seed=cfg.get("seed", 0), count=cfg.get("count", 16),
                                     workers=cfg.get("workers", 1), tolerance_scale=args.tolerance_scale)
    except ValueError as e:
        if isinstance(e, AdmissibilityError):
            raise
        if "check" in str(e):
            raise ConfigError(str(e)) from e
        raise
    write_reports(reports, out)
    for r in reports:
        print(r.summary_line())
    return EXIT_OK if all(r.all_passed() for r in reports) else EXIT_VERIFY


def cmd_oracle_dump(cfg: dict, out: Path, args) -> int:
    path = _write_json(out, "oracles.json", oracles.oracle_catalog())
    print(json.dumps({"file": str(path)}))
    return EXIT_OK


COMMANDS = {
    "norm": cmd_norm, "maxop": cmd_maxop, "frac": cmd_frac, "singular": cmd_singular,
    "weights": cmd_weights, "verify": cmd_verify, "oracle-dump": cmd_oracle_dump,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mixedmorrey", description="Mixed Lebesgue/Morrey norms and operators on grids")
    ap.add_argument("command", choices=list(COMMANDS))
    ap.add_argument("--config", help="JSON experiment config")
    ap.add_argument("--out", default="out", help="output directory (default: ./out)")
    ap.add_argument("--workers", type=int, help="worker threads for corpus evaluation")
    ap.add_argument("--seed", type=int, help="corpus seed (overrides the config)")
    ap.add_argument("--tolerance-scale", type=float, default=1.0, help="multiply declared tolerances")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _error(out: Path | None, code: int, kind: str, message: str) -> int:
    rec = {"error": {"code": code, "kind": kind, "message": message}}
    print(json.dumps(rec, sort_keys=True), file=sys.stderr)
    if out is not None:
        try:
            _write_json(out, "error.json", rec)
        except OSError:
            pass
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        if e.code in (0, None):
            return 0
        return _error(None, EXIT_CONFIG, "usage", "invalid command line")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    if not (args.tolerance_scale > 0 and math.isfinite(args.tolerance_scale)):
        return _error(out, EXIT_CONFIG, "config", "--tolerance-scale must be positive")
    try:
        cfg = _load_config(args.command, args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.workers is not None:
            cfg["workers"] = args.workers
        return COMMANDS[args.command](cfg, out, args)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        return _error(out, EXIT_CONFIG, "schema", f"{where}: {e.message}")
    except ConfigError as e:
        return _error(out, EXIT_CONFIG, "config", str(e))
    except AdmissibilityError as e:
        return _error(out, EXIT_ADMISSIBILITY, "admissibility", str(e))
    except OSError as e:
        return _error(out, EXIT_IO, "io", f"{type(e).__name__}: {e}")
    except (ValueError, TypeError, KeyError) as e:
        return _error(out, EXIT_CONFIG, "config", f"{type(e).__name__}: {e}")


if __name__ == "__main__":
    sys.exit(main())
