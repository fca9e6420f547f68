#!/usr/bin/env python3
"""Bar chart of far-field gaps against their solver-error thresholds.

Usage: gap_bars.py RUN1/gap.json [RUN2/gap.json ...] [--out fig.png]

Each input is a `gap.json` written by the gap CLI ({gap, threshold,
exceeds, ...}); bars show the gap on a log scale with the threshold as
a tick mark, one pair per experiment.  Exits nonzero if a file misses
a required field.
"""

import argparse
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


class SchemaError(Exception):
    pass


def read_gap(path: Path):
    if not path.is_file():
        raise SchemaError(f"{path}: no such file")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    missing = [k for k in ("gap", "threshold", "exceeds") if k not in data]
    if missing:
        raise SchemaError(f"{path}: missing fields {missing}")
    return float(data["gap"]), float(data["threshold"]), bool(data["exceeds"])


def render(labels, gaps, thresholds, exceeds, out: Path):
    x = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(1.0 * len(labels) + 2.5, 4))
    colors = ["#4caf50" if e else "#f44336" for e in exceeds]
    floor = max(min([g for g in gaps if g > 0], default=1.0) * 1e-3, 1e-300)
    ax.bar(x, np.maximum(gaps, floor), color=colors, width=0.6, label="gap")
    ax.scatter(x, thresholds, marker="_", s=400, color="k", label="threshold")
    ax.set_yscale("log")
    ax.set_xticks(x, labels, rotation=30, ha="right")
    ax.set_ylabel(r"far-field gap (L$^2$)")
    ax.legend()
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("inputs", type=Path, nargs="+", help="gap.json files")
    p.add_argument("--out", type=Path, default=None, help="output image path")
    args = p.parse_args(argv)
    out = args.out or args.inputs[0].with_name("gap_bars.png")
    try:
        parsed = [read_gap(path) for path in args.inputs]
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    labels = [path.parent.name or path.stem for path in args.inputs]
    gaps, thresholds, exceeds = zip(*parsed)
    render(labels, gaps, thresholds, exceeds, out)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
