#!/usr/bin/env python3
"""Render agentgate CSV tables as static charts.

Usage:
    plot_tables.py sweep run/sw/sweep_learning_rate.csv out.png
    plot_tables.py scale run/scale/scale_summary.csv out.png

The sweep mode plots train/test accuracy against the swept parameter; the
scale mode plots mean accuracy and success rate with min/max whiskers per
population scale.
"""

import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_rows(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return reader.fieldnames, list(reader)


def plot_sweep(path, out):
    fields, rows = read_rows(path)
    param = fields[0]
    x = [float(r[param]) for r in rows]
    train = [float(r["train_accuracy"]) for r in rows]
    test = [float(r["test_accuracy"]) for r in rows]

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(x, train, marker="o", label="train accuracy")
    ax.plot(x, test, marker="s", label="test accuracy")
    ax.set_xlabel(param.replace("_", " "))
    ax.set_ylabel("accuracy")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, linestyle="--", alpha=0.5)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)


def plot_scale(path, out):
    _, rows = read_rows(path)
    scales = [int(r["n_agents"]) for r in rows]
    acc = [float(r["accuracy_mean"]) for r in rows]
    acc_lo = [m - float(r["accuracy_min"]) for m, r in zip(acc, rows)]
    acc_hi = [float(r["accuracy_max"]) - m for m, r in zip(acc, rows)]
    suc = [float(r["success_mean"]) for r in rows]
    suc_lo = [m - float(r["success_min"]) for m, r in zip(suc, rows)]
    suc_hi = [float(r["success_max"]) - m for m, r in zip(suc, rows)]

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.errorbar(scales, acc, yerr=[acc_lo, acc_hi], marker="o", capsize=4, label="accuracy")
    ax.errorbar(scales, suc, yerr=[suc_lo, suc_hi], marker="s", capsize=4, label="success rate")
    ax.set_xlabel("agents")
    ax.set_ylabel("metric")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, linestyle="--", alpha=0.5)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("kind", choices=["sweep", "scale"])
    parser.add_argument("table")
    parser.add_argument("out")
    args = parser.parse_args()
    try:
        (plot_sweep if args.kind == "sweep" else plot_scale)(args.table, args.out)
    except (OSError, KeyError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
