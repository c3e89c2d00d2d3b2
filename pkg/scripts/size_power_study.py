#!/usr/bin/env python3
"""Rejection-rate study over a grid of scenarios, deviations and sample sizes.

Desk-scale version of the simulation study: defaults cover every scenario at
n=50 with M=500 trials, which runs in a few minutes on a laptop. Crank M, B
and the n list up for publication-grade tables.

Examples:
    python3 scripts/size_power_study.py --scenarios 1,2,3 --d 0 --M 500
    python3 scripts/size_power_study.py --scenarios 7 --d 0,1,2 --n 50,100 \
        --stat ks --threads 4 --output csv
"""

import argparse
import sys

from flmgof.cli import results_to_csv, results_to_json
from flmgof.simlab import run_study


def parse_int_list(text):
    return [int(part) for part in text.split(",") if part.strip()]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scenarios", default="1,2,3,4,5,6,7,8,9")
    parser.add_argument("--d", default="0", help="deviation levels, e.g. 0,1,2")
    parser.add_argument("--n", default="50", help="sample sizes, e.g. 50,100")
    parser.add_argument("--M", type=int, default=500, help="trials per cell")
    parser.add_argument("--projections", type=int, default=5)
    parser.add_argument("--bootstrap", type=int, default=500)
    parser.add_argument("--stat", choices=("ks", "cvm"), default="cvm")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--output", choices=("json", "csv"), default="csv")
    parser.add_argument(
        "--timings", action="store_true", help="append wall time per cell"
    )
    args = parser.parse_args(argv)

    results = run_study(
        parse_int_list(args.scenarios),
        parse_int_list(args.d),
        parse_int_list(args.n),
        M=args.M,
        K=args.projections,
        B=args.bootstrap,
        kind=args.stat,
        seed=args.seed,
        threads=args.threads,
    )
    render = results_to_csv if args.output == "csv" else results_to_json
    sys.stdout.write(render(results, include_timing=args.timings))
    return 0


if __name__ == "__main__":
    sys.exit(main())
