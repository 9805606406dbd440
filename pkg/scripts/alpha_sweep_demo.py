#!/usr/bin/env python3
"""Sweep the dissipation exponent across the solvability threshold.

Runs a shared random initial condition for a list of alphas straddling
alpha_L(n) = (2+n)/4 and writes the per-alpha summary (max enstrophy,
max first moment, energy ratio) under --out.  The sweep collects numerical
indicators only; it decides nothing.
"""

import argparse
import json

from nshd.config import parse_config
from nshd.harness import sweep
from nshd.scaling import lions_exponent


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=2)
    parser.add_argument("--N", type=int, default=64)
    parser.add_argument("--t-end", type=float, default=0.5)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--amplitude", type=float, default=1.0)
    parser.add_argument("--alphas", default=None,
                        help="comma list; default brackets alpha_L(n)")
    parser.add_argument("--out", default="sweep_out")
    args = parser.parse_args()

    a_lions = float(lions_exponent(args.n))
    if args.alphas:
        alphas = [float(a) for a in args.alphas.split(",")]
    else:
        alphas = [round(a_lions + d, 6) for d in (-0.4, -0.2, 0.0, 0.2, 0.4)]

    config = parse_config({
        "schema_version": 1,
        "solver": {"n": args.n, "N": args.N, "alpha": a_lions, "nu": 1.0,
                   "t_end": args.t_end, "diag_stride": 10,
                   "moment_orders": [0, 1, 2]},
        "initial_condition": {"kind": "random_band", "seed": args.seed,
                              "band": [1, 4], "amplitude": args.amplitude},
    })
    summary = sweep(config, alphas, args.out)
    print(f"alpha_L({args.n}) = {a_lions:g}")
    print(json.dumps([row.__dict__ for row in summary.rows], indent=2))
    print(f"summary files in {args.out}/")


if __name__ == "__main__":
    main()
