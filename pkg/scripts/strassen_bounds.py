#!/usr/bin/env python3
"""Strassen's scheme: deflation sequence, lower bounds and seed invariance.

    python3 scripts/strassen_bounds.py --seeds 10
"""

import argparse
import sys

from brent_deflation import DeflationConfig, brent_system, deflation_sequence, strassen_scheme
from brent_deflation.brent import BrentShape, orbit_lower_bound, residual, underdetermined_bound


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seeds", type=int, default=5, help="number of border seeds to try")
    ap.add_argument("--steps", type=int, default=3)
    args = ap.parse_args(argv)

    sch = strassen_scheme()
    print(f"Strassen {sch.shape}: residual {residual(sch):.1e}, "
          f"{sch.shape.n_vars} variables, {sch.shape.n_eqs} equations")
    sys_ = brent_system(sch.shape)
    seqs = set()
    for seed in range(args.seeds):
        rep = deflation_sequence(sys_, sch.flatten(), DeflationConfig(max_steps=args.steps, rng_seed=seed))
        seqs.add(tuple(rep.sequence))
        print(f"seed {seed}: {tuple(rep.sequence)}  min gap ratio {min(rep.gap_ratios):.1e}")
    bound = orbit_lower_bound(sch.shape)
    last = min(s[-1] for s in seqs)
    print(f"orbit lower bound {bound} (finite stabilizer assumed), underdetermined bound "
          f"{underdetermined_bound(sch.shape)}, gap n_s - bound = {last - bound}")
    print("\nbounds for square shapes at the best known ranks:")
    for shape in ["2x2x2:7", "3x3x3:23", "4x4x4:49"]:
        s = BrentShape.parse(shape)
        print(f"  {shape:>9}: orbit {orbit_lower_bound(s):4d}  underdetermined {underdetermined_bound(s):4d}")
    return 0 if len(seqs) == 1 else 1


if __name__ == "__main__":
    sys.exit(main())
