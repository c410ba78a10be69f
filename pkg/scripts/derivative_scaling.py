"""Cost of k-th input derivatives vs number of points, polynomial differentiation against jets.

Writes one CSV row per (method, order, points) using the same columns as `scpinn bench`.

    python3 scripts/derivative_scaling.py --points 50 100 200 400 --out scaling.csv
"""

import argparse
import sys

from scpinn.bench import bench_derivatives, rows_to_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--orders", type=int, nargs="+", default=[0, 2, 4])
    ap.add_argument("--hidden", type=int, nargs="+", default=[50, 50, 50, 50])
    ap.add_argument("--repetitions", type=int, default=9)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    rows = []
    for s in args.points:
        rows += bench_derivatives(tuple(args.hidden), s, tuple(args.orders), args.repetitions)
    text = rows_to_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
