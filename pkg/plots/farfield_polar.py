#!/usr/bin/env python3
"""Polar plot of a far-field modulus from a `farfield.csv` file.

Usage: farfield_polar.py RUN/farfield.csv [--out fig.png] [--title ...]

The input schema is the solver CLI's far-field CSV: a `theta,re,im`
header followed by one row per sampling direction.  Exits nonzero with
a message if the file does not match that schema.
"""

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


class SchemaError(Exception):
    pass


def read_farfield_csv(path: Path):
    """Return (theta, complex values) from a `theta,re,im` CSV."""
    if not path.is_file():
        raise SchemaError(f"{path}: no such file")
    lines = path.read_text().strip().split("\n")
    if not lines or lines[0].strip() != "theta,re,im":
        raise SchemaError(f"{path}: expected header 'theta,re,im'")
    if len(lines) < 2:
        raise SchemaError(f"{path}: no data rows")
    try:
        body = np.array(
            [[float(x) for x in ln.split(",")] for ln in lines[1:]]
        )
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric row ({exc})") from exc
    if body.ndim != 2 or body.shape[1] != 3:
        raise SchemaError(f"{path}: rows must have 3 columns theta,re,im")
    return body[:, 0], body[:, 1] + 1j * body[:, 2]


def render(theta, values, out: Path, title: str):
    fig, ax = plt.subplots(subplot_kw={"projection": "polar"}, figsize=(5, 5))
    # close the curve for display
    th = np.append(theta, theta[0] + 2 * np.pi)
    r = np.abs(np.append(values, values[0]))
    ax.plot(th, r, lw=1.5)
    ax.fill(th, r, alpha=0.15)
    ax.set_title(title)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("input", type=Path, help="farfield.csv produced by the CLI")
    p.add_argument("--out", type=Path, default=None, help="output image path")
    p.add_argument("--title", default=r"$|u_\infty(\theta)|$")
    args = p.parse_args(argv)
    out = args.out or args.input.with_name("farfield_polar.png")
    try:
        theta, values = read_farfield_csv(args.input)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    render(theta, values, out, args.title)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
