#!/usr/bin/env python3
"""Semilog BER curves from a sweep CSV (one curve per channel/mode pair)."""
import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", help="results CSV produced by the sweep")
    ap.add_argument("-o", "--out", default=None, help="output image (default: <csv>.png)")
    args = ap.parse_args()

    curves = defaultdict(list)
    with open(args.csv) as f:
        for row in csv.DictReader(f):
            key = (row["channel"], row["mode"])
            curves[key].append((float(row["es_n0_db"]), float(row["ber"])))

    fig, ax = plt.subplots(figsize=(7, 5))
    for (channel, mode), pts in sorted(curves.items()):
        pts.sort()
        xs = [p[0] for p in pts]
        ys = [max(p[1], 1e-12) for p in pts]
        ax.semilogy(xs, ys, marker="o", label=f"{channel}/{mode}")
    ax.set_xlabel("Es/N0 (dB)")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    out = args.out or args.csv + ".png"
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
