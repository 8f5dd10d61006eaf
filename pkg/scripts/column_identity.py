#!/usr/bin/env python3
"""Compare n_i with two column-based formulas at every level of the built-in fixtures.

``first n`` is n - rank of the first n columns of J_i.  ``projected`` is
N_i/2 - rank of the leading half of the columns after projecting away the
range of the trailing half (see ``projected_columns_nullity``).

    python3 scripts/column_identity.py
"""

import argparse
import sys

import numpy as np

from brent_deflation import DeflationConfig, brent_system, natural_algorithm, strassen_scheme
from brent_deflation.deflation import deflate_once, numerical_rank, projected_columns_nullity
from brent_deflation.fixtures import CUSP_POINTS, WHITNEY_POINTS, cusp, whitney
from brent_deflation.systems import SymbolicSystem


def cases():
    for p in CUSP_POINTS:
        yield f"cusp {p}", SymbolicSystem(cusp()), p
    for p in WHITNEY_POINTS:
        yield f"whitney {p}", SymbolicSystem(whitney()), p
    s = strassen_scheme()
    yield "strassen", brent_system(s.shape), s.flatten()
    s = natural_algorithm(2, 2, 2)
    yield "N(2,2,2)", brent_system(s.shape), s.flatten()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--steps", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    cfg = DeflationConfig(rng_seed=args.seed)

    print(f"{'fixture':<24} {'level':>5} {'n_i':>5} {'first n':>8} {'projected':>10}")
    for label, sys_, x in cases():
        rng = np.random.default_rng(args.seed)
        n = sys_.n_vars
        point = np.asarray(x, dtype=complex)
        J = sys_.jac(point)
        for level in range(args.steps + 1):
            full = numerical_rank(J, cfg).nullity
            first = n - numerical_rank(J[:, :n], cfg).rank
            proj = projected_columns_nullity(J, J.shape[1] // 2, cfg) if level else full
            print(f"{label:<24} {level:>5} {full:>5} {first:>8} {proj:>10}")
            if level < args.steps:
                step = deflate_once(sys_, point, cfg, rng, parent_jac=J)
                sys_, point, J = step.system, step.point, step.jacobian
    return 0


if __name__ == "__main__":
    sys.exit(main())
