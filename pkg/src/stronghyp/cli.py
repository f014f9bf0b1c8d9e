"""Command-line front end.

Exit codes: 0 success, 2 invariant or validation failure, 3 parse error,
4 unsupported model, 5 resource cap.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, _config
from .errors import (ConvergenceError, InvariantViolation, MetricValidationError, ParseError,
                     ResourceCapError, UnsupportedModelError)

EXIT_OK, EXIT_INVARIANT, EXIT_PARSE, EXIT_UNSUPPORTED, EXIT_CAP = 0, 2, 3, 4, 5


class StrictFailure(Exception):
    """A --strict tolerance check failed."""


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(x, Path):
        return str(x)
    return x


class Output:
    """Writes artifacts into the output directory and stamps every JSON file."""

    def __init__(self, args):
        self.dir = Path(args.out)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.args = args
        self.written: list[str] = []

    def effective_config(self) -> dict:
        cfg = {k: v for k, v in vars(self.args).items() if k not in ("func", "replay")}
        return _jsonable(cfg)

    def stamp(self, body: dict) -> dict:
        return {
            "tool": "stronghyp", "version": __version__, "seed": self.args.seed,
            "effective_config": self.effective_config(), "tolerances": _jsonable(_config.as_dict()),
            **_jsonable(body),
        }

    def json(self, name: str, body: dict) -> dict:
        doc = self.stamp(body)
        (self.dir / name).write_text(json.dumps(doc, indent=2) + "\n")
        self.written.append(name)
        return doc

    def text(self, name: str, content: str):
        (self.dir / name).write_text(content)
        self.written.append(name)


def _strict(args, ok: bool, message: str):
    if args.strict and not ok:
        raise StrictFailure(message)


def _set_threads(n: int | None) -> int:
    import numba

    n = n or os.cpu_count() or 1
    n = max(1, min(n, numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


# -- analyze -----------------------------------------------------------------

def cmd_analyze(args) -> int:
    from . import fourpoint
    from .spaces import load_space

    space = load_space(args.file, args.input_format)
    report = fourpoint.analyze(space, threads=args.threads, quartic_cap=args.quartic_cap)
    body = report.to_json()
    body["labels"] = list(space.labels)
    out = Output(args)
    if args.defects:
        A, B = fourpoint.defect_arrays(space)
        if args.format == "csv":
            lines = ["A,B"] + [f"{a!r},{b!r}" for a, b in zip(A.ravel().tolist(), B.ravel().tolist())]
            out.text("defects.csv", "\n".join(lines) + "\n")
        else:
            body["defects"] = [[a, b] for a, b in zip(A.ravel().tolist(), B.ravel().tolist())]
    doc = out.json("analysis.json", body)
    print(json.dumps({k: doc[k] for k in ("n", "delta", "eps_star", "ptolemaic_at_eps")}))
    if math.isfinite(report.eps_star):
        _strict(args, report.delta <= math.log(2) / report.eps_star + _config.MARGIN_TOL,
                "delta exceeds log 2 / eps_star")
    return EXIT_OK


# -- h2 ----------------------------------------------------------------------

def cmd_h2(args) -> int:
    from . import h2

    out = Output(args)
    if args.sub == "margins":
        q = h2.sample_h2_quadruples(tuple(args.bounds), args.count, args.seed)
        m = h2.margins(q)
        d = h2.h2_delta_defect(q[:, 0], q[:, 1], q[:, 2], q[:, 3])
        body = {"min_margin": float(m.min()), "count": args.count, "bounds": list(args.bounds),
                "max_delta_defect": float(d.max()), "log2": math.log(2)}
        if args.format == "csv":
            out.text("margins.csv", "margin\n" + "\n".join(repr(float(v)) for v in m) + "\n")
        else:
            body["margins"] = m.tolist()
        out.json("h2_margins.json", body)
        print(json.dumps({"min_margin": body["min_margin"], "count": args.count, "seed": args.seed}))
        _strict(args, body["min_margin"] >= -_config.MARGIN_TOL, "negative four-point margin")
    elif args.sub == "optimal-delta":
        rows = h2.optimal_delta_experiment(args.a)
        sup = max(r[1] for r in rows)
        body = {"sup_defect": sup, "log2": math.log(2), "gap_to_log2": math.log(2) - sup}
        if args.format == "csv":
            out.text("optimal_delta.csv", "a,defect\n" + "".join(f"{a!r},{d!r}\n" for a, d in rows))
        else:
            body["rows"] = [{"a": a, "defect": d} for a, d in rows]
        out.json("h2_optimal_delta.json", body)
        print(json.dumps({"rows": len(rows), "sup_defect": sup}))
        _strict(args, sup <= math.log(2) + _config.MARGIN_TOL, "defect above log 2")
    else:
        q = h2.sample_planar_quadruples(tuple(args.bounds), args.count, args.seed)
        m = h2.quotient_ptolemy_margin(q[:, 0], q[:, 1], q[:, 2], q[:, 3])
        body = {"min_margin": float(m.min()), "count": args.count, "bounds": list(args.bounds)}
        if args.format == "csv":
            out.text("quotient_margins.csv", "margin\n" + "\n".join(repr(float(v)) for v in m) + "\n")
        out.json("h2_quotient.json", body)
        print(json.dumps({"min_margin": body["min_margin"], "count": args.count, "seed": args.seed}))
        _strict(args, body["min_margin"] >= -_config.MARGIN_TOL, "negative Ptolemy margin")
    return EXIT_OK


# -- green -------------------------------------------------------------------

def cmd_green(args) -> int:
    from . import green
    from .freegroup import format_word, load_walk_config

    mu = load_walk_config(args.config)
    out = Output(args)
    if args.metric == "killed":
        metric = green.green_metric_ball(mu, args.radius, args.solve_radius)
    else:
        S = args.solve_radius or 2 * args.radius
        metric = green.green_metric_table(green.green_function_truncated(mu, S), args.radius)
    need = args.ancona_max + 2 * args.max_arm + 2
    if args.table_radius < need:
        raise ValueError(f"--table-radius must be at least {need} for --ancona-max {args.ancona_max} "
                         f"and --max-arm {args.max_arm}")
    table = green.green_function_truncated(mu, args.table_radius)
    scans = [green.ancona_ratio_scan(table, green.separated_quadruples(mu.rank, R, args.quadruples,
                                                                       seed=args.seed + R, max_arm=args.max_arm))
             for R in range(1, args.ancona_max + 1)]
    rows = [r for s in scans for r in s.rows]
    medians = {R: m for s in scans for R, m in s.medians.items()}
    slope = green.median_slope(medians)
    comp = green.word_green_comparison(table, min(args.table_radius - 2, 8))
    body = {
        "walk": mu.to_config(), "radius": args.radius, "metric_kind": metric.kind,
        "solve_radius": metric.solve_radius, "table_radius": args.table_radius,
        "G_ee": table.G_ee, "F": {format_word((c,)): table.F((c,)) for c in range(2 * mu.rank)},
        "ancona": {"medians": medians, "fitted_slope": slope, "quadruples_per_R": args.quadruples},
        "word_green": {"C1": comp.C1, "slope": comp.slope, "C2": comp.C2, "radius": comp.radius},
    }
    try:
        rep = green.eb_check_green(metric, threads=args.threads)
        body["eb_check"] = rep.to_json()
    except MetricValidationError as exc:
        body["eb_check"] = {"error": f"metric validation failed (truncation radius too small?): {exc}"}
        out.json("green_report.json", body)
        raise
    if args.format == "csv":
        out.text("green_metric.csv", metric.to_csv())
        out.text("ancona.csv", "R,defect\n" + "".join(f"{R},{d!r}\n" for R, d, _ in rows))
    else:
        body["green_metric"] = {"labels": metric.labels, "dist": metric.dist.tolist()}
        body["ancona"]["rows"] = [{"R": R, "defect": d} for R, d, _ in rows]
    out.json("green_report.json", body)
    print(json.dumps({"G_ee": table.G_ee, "eps_star": body["eb_check"]["eps_star"],
                      "ancona_slope": _jsonable(slope)}))
    return EXIT_OK


# -- boundary ----------------------------------------------------------------

def cmd_boundary(args) -> int:
    from . import boundary
    from .freegroup import format_word, load_walk_config

    mu = load_walk_config(args.config)
    out = Output(args)
    params = boundary.VisualParams.green(mu, args.eps)
    rep = boundary.measures_equal_report(mu, params, args.depth, n_walks=args.walks, seed=args.seed)
    body = {"walk": mu.to_config(), "eps": params.eps, "certified_eps": params.certified_eps}
    body.update(rep.to_json())
    ok = rep.headline <= args.tolerance
    if args.checks:
        rng = np.random.default_rng(args.seed)
        conf = []
        for _ in range(args.triples):
            g = boundary.random_word(mu.rank, rng, 3)
            xi, xi2 = boundary.random_ray(mu.rank, rng), boundary.random_ray(mu.rank, rng)
            if xi == xi2:
                continue
            r = boundary.conformality_check(params, g, xi, xi2, depth=30)
            conf.append({"g": format_word(g), "xi": str(xi), "xi2": str(xi2), "gap": r.gap})
        body["conformality"] = {"max_gap": max(c["gap"] for c in conf), "triples": conf}
        rn = []
        for g, cyl in (("ab", "b'"), ("a", "b"), ("ba'", "a")):
            c = boundary.Cylinder.parse(cyl)
            for d in (c.depth, c.depth + 1):
                r = boundary.radon_nikodym_check(mu, g, c, d, params)
                rn.append({"g": g, "cylinder": cyl, "depth": d, "ratio": r.ratio, "integral": r.integral,
                           "gap": r.gap})
        body["radon_nikodym"] = rn
        ok = ok and body["conformality"]["max_gap"] <= args.tolerance
    if args.format == "csv":
        out.text("measures.csv", rep.to_csv())
    out.json("boundary_report.json", body)
    print(json.dumps({"cylinders": len(rep.rows), "max_abs_ratio_minus_1": rep.headline, "within_tolerance": ok}))
    _strict(args, ok, f"deviation {rep.headline:.3e} exceeds tolerance {args.tolerance}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="master seed (u64)")
    p.add_argument("--out", default="stronghyp-out", help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="format of tabular outputs")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    p.add_argument("--strict", action="store_true", help="exit nonzero when a tolerance check fails")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stronghyp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--replay", metavar="REPORT_JSON",
                        help="re-run the command recorded in a report's effective_config")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("analyze", help="four-point analysis of a finite metric space")
    p.add_argument("file", help="distance matrix (.csv or .json) or edge list")
    p.add_argument("--input-format", choices=("csv", "json", "edges"), default=None)
    p.add_argument("--defects", action="store_true", help="also export the (A, B) defect table")
    p.add_argument("--quartic-cap", type=int, default=600)
    _common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("h2", help="hyperbolic plane experiments")
    p.add_argument("sub", choices=("margins", "optimal-delta", "quotient"))
    p.add_argument("--count", type=int, default=100_000)
    p.add_argument("--bounds", type=float, nargs=4, metavar=("XMIN", "XMAX", "YMIN", "YMAX"), default=None)
    p.add_argument("--a", type=float, nargs="+", default=[1.0, 0.1, 0.01])
    _common(p)
    p.set_defaults(func=cmd_h2)

    p = sub.add_parser("green", help="Green metric of a walk on a free group")
    p.add_argument("config", help="walk measure JSON")
    p.add_argument("--radius", type=int, default=5, help="radius of the ball of points")
    p.add_argument("--solve-radius", type=int, default=None)
    p.add_argument("--metric", choices=("killed", "invariant"), default="killed")
    p.add_argument("--table-radius", type=int, default=12, help="radius of the Green table for Ancona scans")
    p.add_argument("--ancona-max", type=int, default=5)
    p.add_argument("--quadruples", type=int, default=200, help="Ancona quadruples per separation")
    p.add_argument("--max-arm", type=int, default=2, help="longest arm of an Ancona quadruple")
    _common(p)
    p.set_defaults(func=cmd_green)

    p = sub.add_parser("boundary", help="harmonic versus Hausdorff measure on cylinders")
    p.add_argument("config", help="walk measure JSON")
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--walks", type=int, default=0, help="Monte Carlo walks (0: exact)")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--tolerance", type=float, default=1e-2)
    p.add_argument("--checks", action="store_true", help="add conformality and Radon-Nikodym checks")
    p.add_argument("--triples", type=int, default=20)
    _common(p)
    p.set_defaults(func=cmd_boundary)
    return parser


def _replay_args(parser, path) -> argparse.Namespace:
    try:
        doc = json.loads(Path(path).read_text())
        cfg = doc["effective_config"]
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ParseError(f"cannot replay {path}: {exc}") from None
    ns = parser.parse_args([cfg["command"]] + ([cfg["sub"]] if "sub" in cfg else [])
                           + ([cfg["file"]] if "file" in cfg else []) + ([cfg["config"]] if "config" in cfg else []))
    for k, v in cfg.items():
        setattr(ns, k, tuple(v) if k == "bounds" and v is not None else v)
    return ns


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.replay:
            args = _replay_args(parser, args.replay)
        if not getattr(args, "command", None):
            parser.print_help()
            return EXIT_INVARIANT
        if getattr(args, "bounds", "unset") is None:
            args.bounds = [-10.0, 10.0, 0.0, 10.0] if args.sub == "margins" else [-10.0, 10.0, -10.0, 10.0]
        args.threads = _set_threads(args.threads)
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UnsupportedModelError as exc:
        print(f"unsupported model: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (ResourceCapError, ConvergenceError, MemoryError) as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (MetricValidationError, InvariantViolation, StrictFailure) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except FileNotFoundError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
