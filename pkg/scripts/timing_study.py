"""Wall-time comparison of single-pass (.no) and recompute heuristics.

    python3 scripts/timing_study.py --n 2000 --m 10000 --k 200
"""

import argparse
import csv
import sys

from digcomm import CentralityMethod, ModificationPlan, random_digraph, run_greedy

NAMES = ["eig", "tc", "hits", "gtc", "b_eig", "b_tc"]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--m", type=int, default=10000, help="expected edge count")
    ap.add_argument("--k", type=int, default=200)
    ap.add_argument("--kind", choices=["update", "downdate"], default="update")
    ap.add_argument("--seed", type=int, default=10)
    ap.add_argument("--metrics", action="store_true",
                    help="also record T_hC/T_aC after every step (slower, excluded from timings)")
    ap.add_argument("--out", help="CSV path; defaults to stdout")
    args = ap.parse_args(argv)

    g = random_digraph(args.n, args.m / (args.n * (args.n - 1)), seed=args.seed)
    print(f"n={g.n} m={g.m} k={args.k}", file=sys.stderr)
    rows = []
    for name in NAMES:
        res = {}
        for recompute in (False, True):
            plan = ModificationPlan(args.kind, args.k, CentralityMethod(name, recompute))
            res[recompute] = run_greedy(g, plan, metrics=args.metrics)
        fast, slow = res[False], res[True]
        rows.append([name, fast.elapsed_s, fast.scoring_passes, slow.elapsed_s, slow.scoring_passes,
                     slow.elapsed_s / fast.elapsed_s])
        print(f"{name:<6} .no {fast.elapsed_s:8.3f}s  recompute {slow.elapsed_s:8.3f}s  "
              f"x{rows[-1][-1]:.0f}", file=sys.stderr)

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["method", "single_pass_s", "single_pass_scorings", "recompute_s", "recompute_scorings",
                "speedup"])
    w.writerows(rows)
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
