"""Command-line front end (``mwl``).

Every computing subcommand resolves its flags into a configuration document
(the same shape accepted by ``mwl eval --config``), runs it, and writes a JSON
report that echoes that configuration. Exit codes: 0 success, 1 usage error,
2 geometric error, 3 tolerance failure under ``--assert``.
"""
import argparse
import csv
import json
import math
import sys
import time

import jsonschema
import numpy as np

from . import __version__
from .ddvv import ddvv_report, wintgen_certificate
from .geometry import NotAnImmersion, fundamental_forms
from .immersions import (
    GALLERY,
    CliffordParams,
    GalleryError,
    clifford,
    clifford_conditions,
    from_dsl,
    gallery_get,
    random_moebius,
)
from .jets import EvaluationError
from .jets.fd import FieldDerivativeSpec, StencilError
from .moebius import UmbilicError, integrability_residual, lorentz_inner, moebius_invariants
from .probe import (
    POINT_ERRORS,
    grid_points,
    grid_scan,
    homogeneity_probe,
    invariance_check,
    random_points,
    summarize,
)

EXIT_OK, EXIT_USAGE, EXIT_GEOMETRY, EXIT_TOLERANCE = 0, 1, 2, 3

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM, "minItems": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["immersion"],
    "properties": {
        "immersion": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["gallery"],
                    "properties": {
                        "gallery": {"type": "string"},
                        "params": {"type": "object", "additionalProperties": {"type": ["string", "number", "array"]}},
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["chart_dim", "components"],
                    "properties": {
                        "chart_dim": {"type": "integer", "minimum": 1, "maximum": 9},
                        "ambient": {"enum": ["euclidean", "sphere"]},
                        "components": {"type": "array", "items": {"type": "string"}, "minItems": 2},
                        "lo": _VEC,
                        "hi": _VEC,
                        "name": {"type": "string"},
                    },
                },
            ]
        },
        "region": {
            "type": "object",
            "additionalProperties": False,
            "required": ["lo", "hi"],
            "properties": {"lo": _VEC, "hi": _VEC},
        },
        "point": _VEC,
        "sampling": {
            "type": "object",
            "additionalProperties": False,
            "required": ["mode", "n"],
            "properties": {
                "mode": {"enum": ["grid", "random"]},
                "n": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
            },
        },
        "fd": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "step": {"type": "number", "exclusiveMinimum": 0},
                "richardson": {"enum": [1, 2, 3]},
                "scheme": {"enum": [2, 4]},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "jet_exact": {"type": "number", "exclusiveMinimum": 0},
                "fd_class": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "moebius_seed": {"type": "integer", "minimum": 0},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"json": {"type": "string"}, "csv": {"type": "string"}, "pretty": {"type": "boolean"}},
        },
    },
}

DEFAULT_TOLERANCES = {"jet_exact": 1e-7, "fd_class": 1e-3}


class UsageError(Exception):
    pass


class GeometryFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------- serialization


def _encode(obj, indent, level):
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    colon = ":" if indent is None else ": "
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}{colon}{_encode(obj[k], indent, level + 1)}" for k in sorted(obj, key=str)]
        return "{" + ",".join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + ",".join(f"{pad}{_encode(v, indent, level + 1)}" for v in obj) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, pretty=False):
    """Stable JSON: sorted keys, doubles with 17 significant digits."""
    return _encode(obj, 2 if pretty else None, 0) + "\n"


def write_csv(path, records):
    rows = [r.as_dict() for r in records]
    m = max((len(r["point"]) for r in rows), default=0)
    fields = [f"u{i + 1}" for i in range(m)] + [k for k in rows[0] if k != "point"] if rows else []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            vals = list(r["point"]) + [r[k] for k in fields[m:]]
            w.writerow(["" if v is None else format(v, ".17g") if isinstance(v, float) else v for v in vals])


# ---------------------------------------------------------------- configuration


def validate_config(cfg):
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise UsageError(f"invalid config at {where}: {exc.message}") from None
    return cfg


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    return validate_config(cfg)


def build_immersion(spec):
    try:
        if "gallery" in spec:
            return gallery_get(spec["gallery"], spec.get("params", {}))
        return from_dsl(
            spec["components"], spec["chart_dim"], spec.get("ambient", "euclidean"),
            spec.get("lo"), spec.get("hi"), spec.get("name", "dsl"),
        )
    except (GalleryError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def fd_spec(cfg):
    fd = cfg.get("fd", {})
    return FieldDerivativeSpec(fd.get("step", 1e-3), fd.get("richardson", 2), fd.get("scheme", 4))


def tolerances(cfg):
    return {**DEFAULT_TOLERANCES, **cfg.get("tolerances", {})}


def _region(cfg):
    r = cfg.get("region")
    return None if r is None else (r["lo"], r["hi"])


def _parse_vector(text, name):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{name}: expected comma-separated numbers, got {text!r}") from None


def _parse_params(items):
    params = {}
    for item in items or []:
        key, eq, value = item.partition("=")
        if not eq or not key:
            raise UsageError(f"--param expects KEY=VALUE, got {item!r}")
        params[key.strip()] = value.strip()
    return params


def config_from_args(args):
    if getattr(args, "example", None) is None:
        raise UsageError("--example NAME is required")
    cfg = {"immersion": {"gallery": args.example, "params": _parse_params(args.param)}}
    if getattr(args, "point", None) is not None:
        cfg["point"] = _parse_vector(args.point, "--point")
    grid, rnd = getattr(args, "grid", None), getattr(args, "random", None)
    if grid is not None and rnd is not None:
        raise UsageError("--grid and --random are mutually exclusive")
    if grid is not None:
        cfg["sampling"] = {"mode": "grid", "n": grid}
    elif rnd is not None:
        if args.seed is None:
            raise UsageError("--random needs --seed")
        cfg["sampling"] = {"mode": "random", "n": rnd, "seed": args.seed}
    if getattr(args, "fd_step", None) is not None:
        cfg["fd"] = {"step": args.fd_step}
    if getattr(args, "tol", None) is not None:
        cfg["tolerances"] = {"jet_exact": args.tol}
    if getattr(args, "moebius_seed", None) is not None:
        cfg["moebius_seed"] = args.moebius_seed
    out = {k: v for k, v in (("json", args.out), ("csv", getattr(args, "csv", None))) if v is not None}
    if args.pretty:
        out["pretty"] = True
    if out:
        cfg["output"] = out
    return validate_config(cfg)


# ---------------------------------------------------------------- commands


def _stats_dict(summary):
    return {k: vars(s) for k, s in summary.scalars.items()}


def _sampling(cfg, required=True, default=None):
    s = cfg.get("sampling", default)
    if s is None and required:
        raise UsageError("a sampling mode is required (--grid N or --random N --seed S)")
    return s


def _scan(imm, cfg, moebius):
    s = _sampling(cfg)
    kw = {"n": s["n"]} if s["mode"] == "grid" else {"count": s["n"], "seed": s.get("seed", 0)}
    return grid_scan(imm, _region(cfg), spec=fd_spec(cfg), tol=tolerances(cfg)["jet_exact"], moebius=moebius, **kw)


def cmd_gap(imm, cfg):
    records = _scan(imm, cfg, moebius=False)
    summ = summarize(records)
    ok = [r for r in records if r.error is None]
    tol = tolerances(cfg)["jet_exact"]
    summary = {
        "count": len(records),
        "errors": summ.errors,
        "certified": summ.certified,
        "uncertified": summ.uncertified,
        "max_gap": max((r.gap for r in ok), default=None),
        "min_gap": min((r.gap for r in ok), default=None),
        "scalars": _stats_dict(summ),
    }
    summary["wintgen_ideal_on_samples"] = bool(ok) and summary["max_gap"] < tol
    if not ok:
        raise GeometryFailure(("every sample point failed", summary, records))
    return summary, records, summary["wintgen_ideal_on_samples"]


def cmd_certify(imm, cfg):
    point = cfg.get("point")
    if point is None:
        raise UsageError("certify needs --point")
    if len(point) != imm.chart_dim:
        raise UsageError(f"--point needs {imm.chart_dim} coordinates")
    tol = tolerances(cfg)["jet_exact"]
    try:
        ff = fundamental_forms(imm, point)
    except (NotAnImmersion, EvaluationError) as exc:
        raise GeometryFailure((str(exc), {"point": point}, [])) from None
    rep = ddvv_report(ff.h, ff.c, tol)
    cert = wintgen_certificate(ff.h, tol)
    summary = {"point": point, "ddvv": vars(rep), "certified": cert is not None, "tolerance": tol}
    if cert is not None:
        summary["certificate"] = {
            "R": cert.R, "S": cert.S, "mu0": cert.mu0, "lambda": cert.lam, "residual": cert.residual,
        }
    return summary, [], cert is not None


def _invariants_at(imm, x, spec, fd_tol):
    inv = moebius_invariants(imm, x, spec)
    m = inv.m
    checks = {
        "Y_null": abs(lorentz_inner(inv.Y, inv.Y)),
        "N_null": abs(lorentz_inner(inv.N, inv.N)),
        "YN_minus_one": abs(lorentz_inner(inv.Y, inv.N) - 1.0),
        "B_trace": float(np.max(np.abs(np.trace(inv.B, axis1=1, axis2=2)))),
        "B_norm2_defect": abs(inv.B_norm2 - (m - 1) / m),
        "trace_identity": abs(float(np.trace(inv.A)) - (1 + m * m * inv.kappa) / (2 * m)),
        "integrability": integrability_residual(inv),
    }
    limits = {"Y_null": 1e-9, "N_null": fd_tol, "YN_minus_one": fd_tol, "B_trace": 1e-8, "B_norm2_defect": 1e-7,
              "trace_identity": fd_tol, "integrability": 5e-3}
    return {
        "point": [float(v) for v in x],
        "rho": inv.rho,
        "B_norm2": inv.B_norm2,
        "Phi_norm2": inv.Phi_norm2,
        "phi_norm": math.sqrt(inv.Phi_norm2),
        "gap": inv.gap,
        "A_eigenvalues": np.sort(np.linalg.eigvalsh(inv.A)),
        "trA": float(np.trace(inv.A)),
        "kappa": inv.kappa,
        "checks": checks,
    }, all(checks[k] < limits[k] for k in checks)


def cmd_invariants(imm, cfg):
    spec, fd_tol = fd_spec(cfg), tolerances(cfg)["fd_class"]
    if "point" in cfg:
        pts = [np.asarray(cfg["point"], dtype=float)]
        if pts[0].size != imm.chart_dim:
            raise UsageError(f"--point needs {imm.chart_dim} coordinates")
    else:
        s = _sampling(cfg)
        region = _region(cfg) or imm.domain
        pts = grid_points(region, s["n"]) if s["mode"] == "grid" else random_points(region, s["n"], s.get("seed", 0))
    rows, ok_all, errors = [], True, 0
    for x in pts:
        try:
            row, ok = _invariants_at(imm, x, spec, fd_tol)
        except POINT_ERRORS as exc:
            rows.append({"point": [float(v) for v in x], "error": str(exc)})
            errors += 1
            continue
        rows.append(row)
        ok_all &= ok
    summary = {"count": len(rows), "errors": errors, "identities_hold": ok_all and errors < len(rows)}
    if errors == len(rows):
        raise GeometryFailure(("Moebius invariants undefined at every point", summary, rows))
    return summary, rows, summary["identities_hold"]


def cmd_probe(imm, cfg):
    s = _sampling(cfg)
    if s["mode"] != "random":
        raise UsageError("probe samples randomly: use --random N --seed S")
    summ = homogeneity_probe(imm, s["n"], s.get("seed", 0), fd_spec(cfg), tolerances(cfg)["jet_exact"])
    summary = {
        "scalars": _stats_dict(summ),
        "tolerances": summ.tolerances,
        "certified": summ.certified,
        "uncertified": summ.uncertified,
        "errors": summ.errors,
        "seed": summ.seed,
        "samples": summ.samples,
        "consistent_with_homogeneity": summ.consistent,
    }
    if summ.errors == summ.samples:
        raise GeometryFailure(("every sample point failed", summary, []))
    return summary, [], summ.consistent


def cmd_transform(imm, cfg, check):
    seed = cfg.get("moebius_seed")
    if seed is None:
        raise UsageError("transform needs --moebius-seed S")
    T = random_moebius(imm.embed_dim, seed)
    summary = {"moebius_seed": seed, "T": T.T}
    if not check:
        return summary, [], True
    s = _sampling(cfg, default={"mode": "random", "n": 10, "seed": 0})
    rep = invariance_check(imm, T, s["n"], s.get("seed", 0), fd_spec(cfg))
    summary.update(
        discrepancies=rep.discrepancies, tolerances=rep.tolerances, samples=rep.samples,
        resampled=rep.resampled, invariant=rep.passed,
    )
    return summary, [], rep.passed


def clifford_check(r, theta, tol=1e-4, samples=10, seed=0):
    """Algebraic Clifford conditions next to the numerically computed DDVV gap."""
    r, theta = np.asarray(r, dtype=float), np.asarray(theta, dtype=float)
    if r.size != theta.size or r.size < 2:
        raise UsageError("--r and --theta need the same length >= 2")
    if np.any(r <= 0):
        raise UsageError("radii must be positive")
    unit = clifford_conditions(r, theta)["unit_sum"]
    rn = r / np.sqrt(np.sum(r * r))
    cond = clifford_conditions(rn, theta)
    minimal = cond["minimal_defect"] < tol
    wintgen = cond["wintgen_defect"] < tol
    verdict = ("minimal, Wintgen ideal" if wintgen else "minimal, not Wintgen ideal") if minimal else "not minimal"
    summary = {
        "radii": r, "theta": theta, "unit_sum": unit,
        "minimal_defect": cond["minimal_defect"], "wintgen_defect": cond["wintgen_defect"],
        "verdict": verdict, "tolerance": tol,
    }
    try:
        imm = clifford(CliffordParams(tuple(rn), tuple(theta)))
    except (GalleryError, ValueError) as exc:
        summary["geometry"] = f"not computed: {exc}"
        return summary, True
    pts = imm.sample(samples, seed)
    gaps, hs = [], []
    for x in pts:
        ff = fundamental_forms(imm, x)
        gaps.append(ddvv_report(ff.h, ff.c).gap)
        hs.append(float(np.linalg.norm(ff.H)))
    summary.update(max_gap=max(gaps), max_mean_curvature=max(hs), samples=samples, seed=seed)
    # the geometric and algebraic verdicts must agree at the same tolerance
    agree = (max(hs) < tol) == minimal and (not minimal or (max(gaps) < tol) == wintgen)
    summary["geometry_agrees"] = agree
    return summary, agree


# ---------------------------------------------------------------- argument parsing


def _common(p, sampling=True, out=True):
    p.add_argument("--example", metavar="NAME", help="gallery member (see `mwl list`)")
    p.add_argument("--param", action="append", metavar="K=V", help="gallery parameter; repeatable")
    if sampling:
        p.add_argument("--grid", type=int, metavar="N", help="N points per chart axis")
        p.add_argument("--random", type=int, metavar="N", help="N seeded random points")
        p.add_argument("--seed", type=int, metavar="S")
    p.add_argument("--fd-step", type=float, metavar="H", help="finite-difference step")
    p.add_argument("--tol", type=float, metavar="T", help="equality tolerance for jet-exact quantities")
    _output(p, csv_out=out)


def _output(p, csv_out=False):
    p.add_argument("--out", metavar="FILE.json", help="write the JSON report here instead of stdout")
    if csv_out:
        p.add_argument("--csv", metavar="FILE.csv", help="also write the records as CSV")
    p.add_argument("--pretty", action="store_true", help="indent the JSON report")
    p.add_argument("--assert", dest="check", action="store_true", help="exit 3 when the checked property fails")
    p.add_argument("--deterministic", action="store_true", help="omit wall_time from the report")


def build_parser():
    parser = _Parser(prog="mwl", description="Wintgen ideal submanifolds: DDVV gaps and Moebius invariants.")
    parser.add_argument("--version", action="version", version=f"mwl {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    sub.add_parser("list", help="list gallery members")
    _common(sub.add_parser("gap", help="DDVV gap over a grid or random sample"))
    p = sub.add_parser("certify", help="Wintgen certificate at one point")
    p.add_argument("--point", required=True, metavar="c1,c2,...")
    _common(p, sampling=False, out=False)
    p = sub.add_parser("invariants", help="Moebius invariants at a point or over a sample")
    p.add_argument("--point", metavar="c1,c2,...")
    _common(p, out=False)
    _common(sub.add_parser("probe", help="homogeneity probe"), out=False)
    p = sub.add_parser("clifford-check", help="Clifford torus conditions vs. computed geometry")
    p.add_argument("--r", required=True, metavar="r1,r2,...")
    p.add_argument("--theta", required=True, metavar="t1,t2,...")
    p.add_argument("--tol", type=float, default=1e-4, metavar="T")
    p.add_argument("--samples", type=int, default=10, metavar="N")
    p.add_argument("--seed", type=int, default=0, metavar="S")
    _output(p)
    p = sub.add_parser("transform", help="random Moebius transformation of a gallery member")
    p.add_argument("--moebius-seed", type=int, metavar="S")
    p.add_argument("--check-invariance", action="store_true")
    _common(p, out=False)
    p = sub.add_parser("eval", help="run a subcommand from a JSON config")
    p.add_argument("--config", required=True, metavar="FILE.json")
    p.add_argument("subcommand", choices=["gap", "certify", "invariants", "probe", "transform"])
    p.add_argument("--check-invariance", action="store_true")
    _output(p, csv_out=True)
    return parser


# ---------------------------------------------------------------- driver


def _emit(report, cfg, records, pretty_flag):
    out = cfg.get("output", {})
    text = dumps(report, out.get("pretty", False) or pretty_flag)
    if "json" in out:
        with open(out["json"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if "csv" in out and records and hasattr(records[0], "as_dict"):
        write_csv(out["csv"], records)


def _records_json(records):
    return [r.as_dict() if hasattr(r, "as_dict") else r for r in records]


def execute(command, cfg, args):
    imm = build_immersion(cfg["immersion"])
    if command == "gap":
        return cmd_gap(imm, cfg)
    if command == "certify":
        return cmd_certify(imm, cfg)
    if command == "invariants":
        return cmd_invariants(imm, cfg)
    if command == "probe":
        return cmd_probe(imm, cfg)
    return cmd_transform(imm, cfg, args.check_invariance)


def run(argv):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    if args.command == "list":
        for name, desc in GALLERY.items():
            print(f"{name:15s} {desc}")
        return EXIT_OK

    start = time.perf_counter()
    try:
        if args.command == "clifford-check":
            r, th = _parse_vector(args.r, "--r"), _parse_vector(args.theta, "--theta")
            summary, ok = clifford_check(r, th, args.tol, args.samples, args.seed)
            command, cfg, records = "clifford-check", {}, []
            if args.out:
                cfg["output"] = {"json": args.out}
            echo = {"r": r, "theta": th, "tol": args.tol, "samples": args.samples, "seed": args.seed}
        elif args.command == "eval":
            cfg = load_config(args.config)
            if args.out:
                cfg = {**cfg, "output": {**cfg.get("output", {}), "json": args.out}}
            if args.csv:
                cfg = {**cfg, "output": {**cfg.get("output", {}), "csv": args.csv}}
            command, echo = args.subcommand, cfg
            summary, records, ok = execute(command, cfg, args)
        else:
            cfg = config_from_args(args)
            command, echo = args.command, {k: v for k, v in cfg.items() if k != "output"}
            summary, records, ok = execute(command, cfg, args)
        status = EXIT_TOLERANCE if args.check and not ok else EXIT_OK
        message = f"{command}: property check failed" if status else None
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GeometryFailure as exc:
        message, summary, records = exc.args[0]
        status = EXIT_GEOMETRY
        command = args.subcommand if args.command == "eval" else args.command
        cfg = load_config(args.config) if args.command == "eval" else config_from_args(args)
        echo = {k: v for k, v in cfg.items() if k != "output"}
    except (UmbilicError, NotAnImmersion, EvaluationError, StencilError, ArithmeticError) as exc:
        print(f"geometric error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY

    if isinstance(echo, dict) and "output" in echo:
        echo = {k: v for k, v in echo.items() if k != "output"}
    report = {
        "tool_version": __version__,
        "command": command,
        "config": echo,
        "summary": summary,
        "records": _records_json(records),
    }
    if not args.deterministic:
        report["wall_time"] = time.perf_counter() - start
    _emit(report, cfg, records, args.pretty)
    if message:
        print(f"{'geometric error' if status == EXIT_GEOMETRY else 'assertion'}: {message}", file=sys.stderr)
    return status


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
