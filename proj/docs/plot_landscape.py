#!/usr/bin/env python3
"""Plot landscape CSVs written by `ndl landscape`.

Usage: plot_landscape.py OUT_DIR [PNG]
"""
import csv
import pathlib
import sys

import matplotlib.pyplot as plt


def main() -> None:
    out = pathlib.Path(sys.argv[1])
    target = sys.argv[2] if len(sys.argv) > 2 else str(out / "landscape.png")
    fig, ax = plt.subplots(figsize=(6, 4))
    for path in sorted(out.glob("landscape_*.csv")):
        with path.open() as f:
            rows = list(csv.DictReader(f))
        beta = [float(r["beta"]) for r in rows]
        risk = [float(r["r"]) for r in rows]
        ax.plot(beta, risk, label=path.stem.removeprefix("landscape_"))
    ax.set_xlabel("beta")
    ax.set_ylabel("r(beta)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(target, dpi=150)


if __name__ == "__main__":
    main()
