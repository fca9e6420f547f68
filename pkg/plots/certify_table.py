#!/usr/bin/env python3
"""Render the certification sweep as a summary table figure.

Usage: certify_table.py CERT_DIR [--out fig.png]

CERT_DIR holds the `certificate_M*.json` reports written by the
certify CLI; the table lists order, unknown count, rank, nullity and
verdict per order, coloring verdict cells.  Exits nonzero if the
directory holds no reports or a report misses a required field.
"""

import argparse
import json
import re
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


class SchemaError(Exception):
    pass


REQUIRED = ("M", "n_unknowns", "rank", "nullity", "verdict")
VERDICT_COLORS = {
    "certified": "#c8e6c9",
    "refuted": "#ffcdd2",
    "inconclusive": "#fff9c4",
}


def read_reports(cert_dir: Path):
    if not cert_dir.is_dir():
        raise SchemaError(f"{cert_dir}: not a directory")
    paths = sorted(
        cert_dir.glob("certificate_M*.json"),
        key=lambda p: int(re.search(r"M(\d+)", p.name).group(1)),
    )
    if not paths:
        raise SchemaError(f"{cert_dir}: no certificate_M*.json reports found")
    rows = []
    for path in paths:
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
        missing = [k for k in REQUIRED if k not in data]
        if missing:
            raise SchemaError(f"{path}: missing fields {missing}")
        if data["verdict"] not in VERDICT_COLORS:
            raise SchemaError(f"{path}: unknown verdict {data['verdict']!r}")
        rows.append([data[k] for k in REQUIRED])
    return rows


def render(rows, out: Path):
    fig, ax = plt.subplots(figsize=(6, 0.28 * len(rows) + 1))
    ax.axis("off")
    table = ax.table(
        cellText=[[str(v) for v in row] for row in rows],
        colLabels=["order M", "unknowns", "rank", "nullity", "verdict"],
        loc="center",
        cellLoc="center",
        bbox=[0.0, 0.0, 1.0, 1.0],
    )
    table.auto_set_font_size(False)
    table.set_fontsize(9)
    for r, row in enumerate(rows, start=1):
        table[r, 4].set_facecolor(VERDICT_COLORS[row[4]])
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("input", type=Path, help="directory with certificate_M*.json")
    p.add_argument("--out", type=Path, default=None, help="output image path")
    args = p.parse_args(argv)
    out = args.out or args.input / "certify_table.png"
    try:
        rows = read_reports(args.input)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    render(rows, out)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
