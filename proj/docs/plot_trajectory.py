#!/usr/bin/env python3
"""Plot risk against time for trajectory CSVs written by `ndl flow` or `ndl empirical`.

Usage: plot_trajectory.py CSV [CSV ...] --out PNG
"""
import argparse
import csv

import matplotlib.pyplot as plt


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("csv", nargs="+")
    parser.add_argument("--out", default="trajectory.png")
    args = parser.parse_args()
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in args.csv:
        with open(name) as f:
            rows = list(csv.DictReader(f))
        ax.semilogy([float(r["t"]) for r in rows], [max(float(r["risk"]), 1e-300) for r in rows], label=name)
    ax.set_xlabel("t")
    ax.set_ylabel("risk")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)


if __name__ == "__main__":
    main()
