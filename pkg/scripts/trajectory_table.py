"""Print trajectory CSVs from a ``digcomm modify`` output directory side by side.

Values are T_hC and T_aC divided by the initial edge count.

    python3 scripts/trajectory_table.py out/ --every 5
"""

import argparse
from pathlib import Path

from digcomm.engine import read_trajectory_csv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("directory")
    ap.add_argument("--every", type=int, default=1, help="print every N-th step")
    ap.add_argument("--index", choices=["thc", "tac"], default="thc")
    args = ap.parse_args(argv)

    trajs = {}
    for path in sorted(Path(args.directory).glob("traj_*.csv")):
        with open(path) as fh:
            trajs[path.stem[5:]] = read_trajectory_csv(fh, label=path.stem[5:])
    if not trajs:
        raise SystemExit(f"no traj_*.csv files in {args.directory}")

    labels = list(trajs)
    print("step " + " ".join(f"{lab[:12]:>12}" for lab in labels))
    steps = max(len(t) for t in trajs.values())
    for s in range(0, steps, args.every):
        cells = []
        for lab in labels:
            t = trajs[lab]
            vals = t.thc if args.index == "thc" else t.tac
            cells.append(f"{vals[s] / t.m0:12.4f}" if s < len(t) and t.m0 else f"{'':>12}")
        print(f"{s:>4} " + " ".join(cells))


if __name__ == "__main__":
    main()
