#!/usr/bin/env python3
"""Plots from the CSV files the pacsnoc CLI writes.

Usage: scripts/plot.py <output dir> [<output dir> ...]

Each directory is scanned for the files below; every plot found is saved
next to its CSV as a PNG.
  bound_sweep.csv     upper bound against S per prior and delta
  grid_posterior.csv  posterior mass over (k, beta)
  train_metrics.csv   training curves
  evaluate_summary.csv  test cost and collisions per controller
  bound.csv           bound terms (two-stage runs: one row per split)
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


def bound_sweep(path: Path) -> bool:
    df = pd.read_csv(path)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for (prior, delta), g in df.groupby(["prior", "delta"]):
        g = g.sort_values("S")
        ax.plot(g["S"], g["upper"], marker="o", label=f"{prior}, delta={delta}")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("S")
    ax.set_ylabel("upper bound")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path.with_suffix(".png"), dpi=150)
    plt.close(fig)
    return True


def grid_posterior(path: Path) -> bool:
    df = pd.read_csv(path)
    table = df.pivot(index="beta", columns="k", values="mass")
    fig, ax = plt.subplots(figsize=(5, 4))
    mesh = ax.pcolormesh(table.columns, table.index, table.values, shading="auto")
    fig.colorbar(mesh, ax=ax, label="posterior mass")
    ax.set_xlabel("k")
    ax.set_ylabel("beta")
    fig.tight_layout()
    fig.savefig(path.with_suffix(".png"), dpi=150)
    plt.close(fig)
    return True


def train_metrics(path: Path) -> bool:
    df = pd.read_csv(path)
    x = df.columns[0]
    if len(df) < 2:
        return False
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for col in df.columns[1:]:
        ax.plot(df[x], df[col], label=col)
    ax.set_xlabel(x)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path.with_suffix(".png"), dpi=150)
    plt.close(fig)
    return True


def evaluate_summary(path: Path) -> bool:
    df = pd.read_csv(path)
    fig, (a, b) = plt.subplots(1, 2, figsize=(8, 3.5))
    a.bar(df["controller"], df["mean_transformed_cost"], yerr=df["stderr_transformed_cost"])
    a.set_xlabel("controller")
    a.set_ylabel("mean transformed test cost")
    b.bar(df["controller"], df["collision_pct"])
    b.set_xlabel("controller")
    b.set_ylabel("collisions (%)")
    fig.tight_layout()
    fig.savefig(path.with_suffix(".png"), dpi=150)
    plt.close(fig)
    return True


def bound(path: Path) -> bool:
    df = pd.read_csv(path)
    if "s1" not in df.columns:
        print(df[["method", "S", "delta", "lambda", "empirical_cost", "upper", "lower"]].to_string(index=False))
        return False
    df = df.sort_values("s1")
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(df["s1"], df["upper"], marker="o")
    ax.axhline(1.0, color="gray", linestyle="--", linewidth=0.8)
    ax.set_xlabel("S1")
    ax.set_ylabel("two-stage upper bound")
    fig.tight_layout()
    fig.savefig(path.with_suffix(".png"), dpi=150)
    plt.close(fig)
    return True


HANDLERS = {
    "bound_sweep.csv": bound_sweep,
    "grid_posterior.csv": grid_posterior,
    "train_metrics.csv": train_metrics,
    "evaluate_summary.csv": evaluate_summary,
    "bound.csv": bound,
}


def main(argv: list[str]) -> int:
    if len(argv) < 2:
        print(__doc__)
        return 2
    for d in map(Path, argv[1:]):
        for name, handler in HANDLERS.items():
            path = d / name
            if path.exists():
                print(f"{'plotted' if handler(path) else 'skipped'} {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
