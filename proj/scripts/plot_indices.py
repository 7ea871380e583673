#!/usr/bin/env python3
"""Render the fig_*.csv index series of a run directory to PNG files.

usage: plot_indices.py RUN_DIR [--out DIR]
"""
import argparse
import glob
import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


def event_times(run_dir):
    path = os.path.join(run_dir, "epochs.json")
    if not os.path.exists(path):
        return []
    with open(path) as f:
        return [e["start_time_s"] for e in json.load(f)["epochs"][1:]]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("run_dir")
    ap.add_argument("--out", help="directory for PNGs (default: RUN_DIR)")
    args = ap.parse_args()
    out = args.out or args.run_dir
    os.makedirs(out, exist_ok=True)
    events = event_times(args.run_dir)

    files = sorted(glob.glob(os.path.join(args.run_dir, "fig_*.csv")))
    if not files:
        raise SystemExit(f"no fig_*.csv files in {args.run_dir}")
    for path in files:
        df = pd.read_csv(path, na_values=["nan", "inf", "-inf"])
        name = os.path.splitext(os.path.basename(path))[0]
        fig, ax = plt.subplots(figsize=(8, 3.5))
        ax.plot(df.iloc[:, 0], df.iloc[:, 1], lw=1.2)
        for t in events:
            ax.axvline(t, color="grey", ls=":", lw=0.8)
        ax.set_xlabel("time (s)")
        ax.set_ylabel(df.columns[1])
        ax.set_title(name)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        target = os.path.join(out, name + ".png")
        fig.savefig(target, dpi=120)
        plt.close(fig)
        print("wrote", target)


if __name__ == "__main__":
    main()
