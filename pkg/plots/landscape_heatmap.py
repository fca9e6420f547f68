#!/usr/bin/env python3
"""Heatmap of log10(misfit) from a `landscape.csv` scan.

Usage: landscape_heatmap.py RUN/landscape.csv [--meta RUN/landscape_meta.json]
                            [--out fig.png]

Input schema: `p1,p2,misfit` rows on a full tensor-product grid (the
landscape CLI output).  If the sidecar metadata file is present (it is
looked up next to the CSV by default) the axes are labelled with the
parameter names and the true parameter values are marked with a cross;
the grid minimum is always marked with a star.  Exits nonzero on a
schema mismatch.
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


def read_landscape_csv(path: Path):
    """Return (v1, v2, misfit[n1, n2]) from a `p1,p2,misfit` CSV."""
    if not path.is_file():
        raise SchemaError(f"{path}: no such file")
    lines = path.read_text().strip().split("\n")
    if not lines or lines[0].strip() != "p1,p2,misfit":
        raise SchemaError(f"{path}: expected header 'p1,p2,misfit'")
    try:
        body = np.array(
            [[float(x) for x in ln.split(",")] for ln in lines[1:]]
        )
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric row ({exc})") from exc
    if body.ndim != 2 or body.shape[1] != 3:
        raise SchemaError(f"{path}: rows must have 3 columns p1,p2,misfit")
    v1 = np.unique(body[:, 0])
    v2 = np.unique(body[:, 1])
    if len(body) != len(v1) * len(v2):
        raise SchemaError(f"{path}: rows do not form a full {len(v1)}x{len(v2)} grid")
    grid = np.full((len(v1), len(v2)), np.nan)
    i1 = np.searchsorted(v1, body[:, 0])
    i2 = np.searchsorted(v2, body[:, 1])
    grid[i1, i2] = body[:, 2]
    if np.isnan(grid).any():
        raise SchemaError(f"{path}: duplicate or missing grid points")
    return v1, v2, grid


def read_meta(path: Path):
    try:
        meta = json.loads(path.read_text())
        names = (meta["axis1"]["name"], meta["axis2"]["name"])
        truth = meta.get("truth")
        return names, truth
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise SchemaError(f"{path}: bad metadata ({exc})") from exc


def render(v1, v2, grid, out: Path, names=("p1", "p2"), truth=None):
    fig, ax = plt.subplots(figsize=(6, 5))
    floor = np.max(grid) * 1e-16 + 1e-300
    logm = np.log10(np.maximum(grid, floor))
    mesh = ax.pcolormesh(v1, v2, logm.T, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=r"$\log_{10}$ misfit")
    i, j = np.unravel_index(np.argmin(grid), grid.shape)
    ax.plot(v1[i], v2[j], "w*", ms=14, mec="k", label="grid minimum")
    if truth is not None and names[0] in truth and names[1] in truth:
        ax.plot(truth[names[0]], truth[names[1]], "rx", ms=12, mew=2, label="truth")
    ax.set_xlabel(names[0])
    ax.set_ylabel(names[1])
    ax.legend(loc="upper right")
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return (i, j)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("input", type=Path, help="landscape.csv produced by the CLI")
    p.add_argument("--meta", type=Path, default=None, help="landscape_meta.json")
    p.add_argument("--out", type=Path, default=None, help="output image path")
    args = p.parse_args(argv)
    out = args.out or args.input.with_name("landscape_heatmap.png")
    meta_path = args.meta or args.input.with_name("landscape_meta.json")
    try:
        v1, v2, grid = read_landscape_csv(args.input)
        names, truth = ("p1", "p2"), None
        if meta_path.is_file():
            names, truth = read_meta(meta_path)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    render(v1, v2, grid, out, names, truth)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
