"""Command-line front end: prodtail {dist,tail,conv,indicator,classify,scenario,oracle}."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import conv, indicators, oracles, scenarios, specio
from .errors import ProdTailError, SpecError

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2, 3
OUTPUT_ENV = "PRODTAIL_OUTPUT_DIR"
VERDICT_EXIT = {"pass": EXIT_OK, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _write_atomic(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _grid(args):
    if args.x:
        return np.array(sorted(float(v) for v in args.x))
    if args.scale == "linear":
        return np.linspace(args.x_min, args.x_max, args.points)
    return np.geomspace(args.x_min, args.x_max, args.points)


class _Run:
    """Collects outputs of one command and writes them with a metadata block."""

    def __init__(self, args):
        self.args = args
        self.t0 = time.perf_counter()
        self.out = Path(args.out or os.environ.get(OUTPUT_ENV) or "prodtail-output")
        self.stem = args.command
        self.formats = set(args.format)

    def metadata(self):
        config = {k: v for k, v in vars(self.args).items() if k not in ("func",)}
        return {"version": __version__, "command": self.args.command, "config": config, "wall_time": time.perf_counter() - self.t0}

    def emit(self, result, csvs=None, stdout=None):
        doc = {"metadata": self.metadata(), "result": result}
        text = json.dumps(doc, indent=2, default=_json_default)
        if "json" in self.formats:
            _write_atomic(self.out / f"{self.stem}.json", text + "\n")
        if "csv" in self.formats:
            for name, body in (csvs or {}).items():
                _write_atomic(self.out / f"{self.stem}-{name}.csv", body)
        print(stdout if stdout is not None else text)


# ---------------------------------------------------------------------------
# commands


def cmd_dist(args):
    d = specio.load_spec(args.spec)
    report = d.validate()
    locs, lms = d.atoms(0.0, np.inf, limit=args.atoms)
    result = {
        "name": d.name,
        "family": d.to_spec()["family"],
        "validation": report.to_dict(),
        "atoms": [[float(l), float(math.exp(m))] for l, m in zip(locs, lms)],
        "spec": d.to_spec(),
    }
    _Run(args).emit(result)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_tail(args):
    d = specio.load_spec(args.spec)
    xs = _grid(args)
    vals = np.atleast_1d(d.tail_log(xs))
    body = _csv(["x", "tail_log"], zip(xs, vals))
    _Run(args).emit({"x": xs, "tail_log": vals}, {"tail": body}, stdout=body.rstrip())
    return EXIT_OK


def cmd_conv(args):
    F, G = specio.load_spec(args.spec_f), specio.load_spec(args.spec_g)
    xs = _grid(args)
    rows, result = [], []
    for x, b in conv.product_tail_grid(F, G, xs, tol=args.tol, workers=args.workers):
        if isinstance(b, Exception):
            raise b
        rows.append((x, b.lo, b.hi, int(b.converged)))
        result.append({"x": x, **b.to_dict()})
    body = _csv(["x", "log_lo", "log_hi", "converged"], rows)
    _Run(args).emit(result, {"conv": body}, stdout=body.rstrip())
    return EXIT_OK


def cmd_indicator(args):
    d = specio.load_spec(args.spec)
    grid = _grid(args)
    series = {t: indicators.c_star_series(d, t, grid) for t in args.t}
    result = {"series": {str(t): {k: v for k, v in s.to_dict().items() if k != "points"} for t, s in series.items()}}
    if len(series) >= 4:
        result["zero_shift"] = indicators.c_zero_extrapolate(series).to_dict()
    csvs = {f"t{t:g}": s.to_csv() for t, s in series.items()}
    _Run(args).emit(result, csvs)
    return EXIT_OK


def cmd_classify(args):
    d = specio.load_spec(args.spec)
    cfg = indicators.ClassifyConfig(
        grid_lo=args.x_min, grid_hi=args.x_max, grid_n=args.points, t_list=tuple(args.t), tol=args.tol
    )
    report = indicators.classify(d, cfg)
    _Run(args).emit(report.to_dict())
    return EXIT_OK


def _scenario_params(path):
    if not path:
        return {}
    try:
        params = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read scenario parameters: {exc}", str(path)) from exc
    if not isinstance(params, dict):
        raise SpecError("scenario parameters must be an object", str(path))
    for key in ("F", "G"):
        if key in params:
            params[key] = specio.parse_spec(params[key], f"{path}:{key}")
    return params


def cmd_scenario(args):
    params = _scenario_params(args.params)
    res = scenarios.run_scenario(args.id, **params)
    run = _Run(args)
    run.stem = f"scenario-{args.id}"
    run.emit(res.to_dict(), res.observation_csvs(), stdout=json.dumps(
        {"scenario_id": res.scenario_id, "verdict": res.verdict, "checks": [c.to_dict() for c in res.checks]},
        indent=2, default=_json_default))
    return VERDICT_EXIT[res.verdict]


def cmd_oracle(args):
    xs = _grid(args)
    rows, result = [], []
    if args.kind == "expexp":
        for x in xs:
            v = oracles.expexp_closed_form(x)
            rows.append((x, v))
            result.append({"x": x, "log_tail": v})
        header = ["x", "log_tail"]
    elif args.kind == "sumconv2":
        V = specio.load_spec(args.specs[0])
        for x in xs:
            b = oracles.fixed_grid_sum_conv2(V, x, cells=args.cells)
            rows.append((x, b.lo, b.hi))
            result.append({"x": x, **b.to_dict()})
        header = ["x", "log_lo", "log_hi"]
    else:
        if len(args.specs) != 2:
            raise SpecError(f"oracle {args.kind} needs two spec files", "argv")
        F, G = (specio.load_spec(p) for p in args.specs)
        if args.kind == "grid":
            for x in xs:
                b = oracles.fixed_grid_stieltjes(F, G, x, cells=args.cells)
                rows.append((x, b.lo, b.hi))
                result.append({"x": x, **b.to_dict()})
            header = ["x", "log_lo", "log_hi"]
        else:
            for x, e in zip(xs, oracles.mc_product_tail(F, G, xs, n=args.n, seed=args.seed)):
                rows.append((x, e.p, e.ci_lo, e.ci_hi))
                result.append({"x": x, **e.to_dict()})
            header = ["x", "p", "ci_lo", "ci_hi"]
    body = _csv(header, rows)
    run = _Run(args)
    run.stem = f"oracle-{args.kind}"
    run.emit(result, {"values": body}, stdout=body.rstrip())
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_grid(p, x_min=10.0, x_max=1e6, points=400):
    g = p.add_argument_group("grid")
    g.add_argument("--x", type=float, nargs="+", help="explicit evaluation points (overrides the grid)")
    g.add_argument("--x-min", type=float, default=x_min)
    g.add_argument("--x-max", type=float, default=x_max)
    g.add_argument("--points", type=int, default=points)
    g.add_argument("--scale", choices=("geometric", "linear"), default="geometric")


def build_parser():
    parser = _Parser(prog="prodtail", description=__doc__)
    parser.add_argument("--version", action="version", version=f"prodtail {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./prodtail-output)")
    common.add_argument("--format", nargs="+", choices=("json", "csv"), default=["json", "csv"])
    common.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("dist", parents=[common], help="parse and validate a distribution spec")
    p.add_argument("spec")
    p.add_argument("--atoms", type=int, default=20, help="number of atoms to list")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("tail", parents=[common], help="log tail values")
    p.add_argument("spec")
    _add_grid(p, 0.0, 10.0, 11)
    p.set_defaults(func=cmd_tail, scale="linear")

    p = sub.add_parser("conv", parents=[common], help="bracketed log tail of the product")
    p.add_argument("spec_f")
    p.add_argument("spec_g")
    _add_grid(p, 1.0, 1e3, 10)
    p.add_argument("--tol", type=float, default=conv.DEFAULT_TOL)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_conv)

    p = sub.add_parser("indicator", parents=[common], help="shift-ratio series and zero-shift limits")
    p.add_argument("spec")
    p.add_argument("--t", type=float, nargs="+", default=[0.5, 0.25, 0.125, 0.0625])
    _add_grid(p)
    p.set_defaults(func=cmd_indicator)

    p = sub.add_parser("classify", parents=[common], help="tail-class evidence report")
    p.add_argument("spec")
    p.add_argument("--t", type=float, nargs="+", default=[0.5, 0.25, 0.125, 0.0625])
    p.add_argument("--tol", type=float, default=0.01)
    _add_grid(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("scenario", parents=[common], help="run a named scenario")
    p.add_argument("id", choices=sorted(scenarios.SCENARIOS))
    p.add_argument("--params", help="JSON file of scenario parameters")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("oracle", parents=[common], help="independent reference values")
    p.add_argument("kind", choices=("mc", "grid", "expexp", "sumconv2"))
    p.add_argument("specs", nargs="*", help="distribution specs (two for mc/grid, one for sumconv2)")
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--cells", type=int, default=100_000)
    _add_grid(p, 0.1, 100.0, 4)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProdTailError as exc:
        print(f"prodtail: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
