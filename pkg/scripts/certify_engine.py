#!/usr/bin/env python3
"""Cross-check conv-engine brackets against the fixed-grid and Monte Carlo oracles.

Every (F, G) pair from a small zoo is evaluated on a few x values; the engine
bracket must overlap the fixed-grid bracket and meet the 99% Monte Carlo interval.
"""

import argparse
import itertools
import math
import sys
import warnings

import numpy as np

from prodtail import dist as D
from prodtail import oracles as O
from prodtail.conv import product_tail


def zoo():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", D.ConstructionWarning)
        osc = D.make_oscillating_heavy(1.55, 25.0)
    return {
        "exp": D.make_exponential(1.0),
        "pareto2": D.make_power_law(2.0),
        "lattice": D.lattice_plateau(math.log(2.0)),
        "osc-tilt": D.make_tilt(osc, 0.5, 1.0),
        "point2": D.make_point_mass(2.0),
        "gauss": D.gaussian_type(1.0),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--x", type=float, nargs="+", default=[0.5, 5.0, 50.0])
    ap.add_argument("--tol", type=float, default=1e-6)
    ap.add_argument("--cells", type=int, default=100_000)
    ap.add_argument("--mc", type=int, default=0, help="Monte Carlo sample size (0 skips it)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    dists = zoo()
    bad = 0
    print(f"{'F':>9s} {'G':>9s} {'x':>7s} {'engine log H':>24s} {'grid':>8s} {'mc':>8s}")
    for (fn, F), (gn, G) in itertools.combinations_with_replacement(dists.items(), 2):
        for x in args.x:
            b = product_tail(F, G, x, tol=args.tol)
            g = O.fixed_grid_stieltjes(F, G, x, cells=args.cells)
            grid_ok = b.overlaps(g)
            mc = "-"
            if args.mc and b.mid > math.log(1e-6):
                est = O.mc_product_tail(F, G, x, n=args.mc, seed=args.seed)
                mc_ok = math.exp(b.lo) <= est.ci_hi and est.ci_lo <= math.exp(b.hi)
                mc = "ok" if mc_ok else "MISS"
                bad += not mc_ok
            bad += not grid_ok
            print(f"{fn:>9s} {gn:>9s} {x:7g} {b.mid:24.15g} {'ok' if grid_ok else 'MISS':>8s} {mc:>8s}")
    print(f"{bad} disagreement(s)")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
