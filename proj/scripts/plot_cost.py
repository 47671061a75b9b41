#!/usr/bin/env python3
"""Plot a communication-cost sweep produced by `lpos cost`.

Usage:
    lpos cost --n-min 2 --n-max 2048 --out cost.csv
    scripts/plot_cost.py cost.csv -o cost.png

Reads the "scheme,n,bits" CSV and draws one line per scheme. This is a
convenience for eyeballing the crossover; the numbers themselves are
asserted in tests/cost_test.cpp.
"""

import argparse
import collections
import csv
import sys


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv", help="cost sweep CSV (scheme,n,bits), '-' for stdin")
    ap.add_argument("-o", "--out", help="write PNG here instead of showing")
    ap.add_argument("--linear", action="store_true", help="linear axes (default log-log)")
    args = ap.parse_args()

    try:
        import matplotlib

        if args.out:
            matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib is required: pip install matplotlib", file=sys.stderr)
        return 1

    fh = sys.stdin if args.csv == "-" else open(args.csv, newline="")
    series = collections.defaultdict(lambda: ([], []))
    with fh:
        for row in csv.DictReader(fh):
            xs, ys = series[row["scheme"]]
            xs.append(int(row["n"]))
            ys.append(int(row["bits"]))
    if not series:
        print("no rows in input", file=sys.stderr)
        return 1

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for scheme in sorted(series):
        xs, ys = series[scheme]
        ax.plot(xs, ys, label=scheme)
    if not args.linear:
        ax.set_xscale("log", base=2)
        ax.set_yscale("log", base=2)
    ax.set_xlabel("users (n)")
    ax.set_ylabel("bits per round")
    ax.set_title("Per-round communication cost")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()

    if args.out:
        fig.savefig(args.out, dpi=150)
        print(f"wrote {args.out}")
    else:
        plt.show()
    return 0


if __name__ == "__main__":
    sys.exit(main())
