#!/usr/bin/env python3
"""Run every scenario (or a chosen subset) and write one JSON report per run."""

import argparse
import json
import sys
import warnings
from pathlib import Path

from prodtail import dist as D
from prodtail import specio
from prodtail.scenarios import SCENARIOS, run_scenario

PARAMS = Path(__file__).resolve().parents[1] / "specs" / "scenarios"


def load_params(path):
    params = json.loads(path.read_text())
    for key in ("F", "G"):
        if key in params:
            params[key] = specio.parse_spec(params[key], f"{path}:{key}")
    return params


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("ids", nargs="*", help="scenario ids or parameter-file stems (default: every file in specs/scenarios)")
    ap.add_argument("--out", default="scenario-reports")
    args = ap.parse_args(argv)

    files = sorted(PARAMS.glob("*.json"))
    chosen = [f for f in files if not args.ids or f.stem in args.ids]
    extra = [i for i in args.ids if i in SCENARIOS and not any(f.stem == i for f in files)]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    runs = [(f.stem, None, f) for f in chosen] + [(i, i, None) for i in extra]
    worst = 0
    for label, sid, path in runs:
        if path:
            sid = next(k for k in sorted(SCENARIOS, key=len, reverse=True) if label.startswith(k))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", D.ConstructionWarning)
            params = load_params(path) if path else {}
            res = run_scenario(sid, **params)
        (out / f"{label}.json").write_text(json.dumps(res.to_dict(), indent=2, default=str) + "\n")
        print(f"{label:34s} {res.verdict:13s} {res.runtime:7.1f} s")
        for c in res.checks:
            if c.outcome != "pass":
                print(f"    {c.outcome}: {c.name} ({c.detail})")
        worst = max(worst, {"pass": 0, "inconclusive": 3, "fail": 2}[res.verdict])
    return worst


if __name__ == "__main__":
    sys.exit(main())
