#!/usr/bin/env python3
"""Deflation sequences of natural algorithms N(m,n,p), one row per shape.

    python3 scripts/natural_table.py 2x2x2 2x2x3 2x3x3
    python3 scripts/natural_table.py 3x3x3 --rank-tol 1e-12   # about 8 minutes
"""

import argparse
import sys
import time

from brent_deflation import DeflationConfig, brent_system, deflation_sequence, natural_algorithm
from brent_deflation.fixtures import EXPECTED, parse_natural


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("shapes", nargs="*", default=["2x2x2", "2x2x3", "2x3x3"])
    ap.add_argument("--steps", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rank-tol", type=float, default=DeflationConfig.rank_rel_tol)
    args = ap.parse_args(argv)

    cfg = DeflationConfig(max_steps=args.steps, rng_seed=args.seed, rank_rel_tol=args.rank_tol)
    print(f"{'shape':>9}  {'sequence':<24} {'reference':<24} {'min gap':>8} {'seconds':>8}")
    mismatches = 0
    for text in args.shapes:
        mnp = parse_natural(text)
        sch = natural_algorithm(*mnp)
        t0 = time.perf_counter()
        rep = deflation_sequence(brent_system(sch.shape), sch.flatten(), cfg,
                                 progress=lambda i, rr: print(f"  level {i}: nullity {rr.nullity}",
                                                              file=sys.stderr, flush=True))
        elapsed = time.perf_counter() - t0
        ref = EXPECTED.get(("natural", mnp))
        got = tuple(rep.sequence)
        if ref is not None and got != ref[: len(got)]:
            mismatches += 1
        print(f"N{mnp!s:>8}  {got!s:<24} {ref!s:<24} {min(rep.gap_ratios):8.1e} {elapsed:8.1f}"
              + ("" if rep.complete else f"  INCOMPLETE: {rep.error}"))
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
