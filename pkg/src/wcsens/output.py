"""Deterministic CSV / JSON / SVG emitters for frontiers and histograms.

All numbers are written with a fixed %.12g format so identical inputs give
byte-identical files; no timestamps are embedded anywhere.
"""

from __future__ import annotations

import csv
import json
from typing import List, Optional, Sequence

import numpy as np

from .dist import DiscreteDistribution
from .dro import FrontierPoint

SCHEMA_VERSION = 1


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def frontier_csv_rows(points: List[FrontierPoint], nominal_name: str = "mean"):
    """Rows (header first) for a frontier table.

    Decision vectors expand into decision_0..decision_{d-1} columns; failed
    points keep their eps with an error message in the last column.
    """
    measures = []
    for pt in points:
        for key in pt.sensitivities:
            if key not in measures:
                measures.append(key)
    vector = any(isinstance(p.decision, np.ndarray) for p in points)
    if vector:
        dim = max(
            p.decision.size for p in points if isinstance(p.decision, np.ndarray)
        )
        dec_cols = [f"decision_{i}" for i in range(dim)]
    else:
        dec_cols = ["decision"]
    header = ["eps"] + dec_cols + [nominal_name]
    header += [f"{m}_sensitivity" for m in measures] + ["error"]
    rows = [header]
    for pt in points:
        if isinstance(pt.decision, np.ndarray):
            decision = [_fmt(v) for v in pt.decision]
        elif vector:
            decision = [""] * len(dec_cols)
        else:
            decision = [_fmt(pt.decision)]
        row = [_fmt(pt.eps)] + decision + [_fmt(pt.nominal)]
        row += [_fmt(pt.sensitivities.get(m, float("nan"))) for m in measures]
        row.append(pt.error or "")
        rows.append(row)
    return rows


def write_csv(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def histogram_rows(d: DiscreteDistribution, bins: int = 30):
    """Probability-weighted histogram as (bin_left, bin_right, weight) rows."""
    lo, hi = d.min(), d.max()
    if hi <= lo:
        hi = lo + 1.0
    counts, edges = np.histogram(d.values, bins=bins, range=(lo, hi), weights=d.probs)
    rows = [["bin_left", "bin_right", "weight"]]
    for i in range(bins):
        rows.append([_fmt(edges[i]), _fmt(edges[i + 1]), _fmt(counts[i])])
    return rows


def write_json(path, payload: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def json_dumps(payload: dict) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, **payload}, sort_keys=True)


def scatter_svg(
    path,
    series: Sequence[tuple],
    x_label: str,
    y_label: str,
    title: Optional[str] = None,
    width: int = 640,
    height: int = 480,
) -> None:
    """Minimal line+marker SVG plot; series is [(name, xs, ys), ...]."""
    margin = 60
    xs_all = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    ys_all = np.concatenate([np.asarray(s[2], dtype=float) for s in series])
    finite = np.isfinite(xs_all) & np.isfinite(ys_all)
    if not finite.any():
        xs_all = ys_all = np.array([0.0, 1.0])
    else:
        xs_all, ys_all = xs_all[finite], ys_all[finite]
    x_lo, x_hi = float(xs_all.min()), float(xs_all.max())
    y_lo, y_hi = float(ys_all.min()), float(ys_all.max())
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0

    def sx(x):
        return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 15}" text-anchor="middle" '
        f'font-size="14">{x_label}</text>',
        f'<text x="18" y="{height / 2:.1f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 18 {height / 2:.1f})">{y_label}</text>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.1f}" y="25" text-anchor="middle" '
            f'font-size="15">{title}</text>'
        )
    for t in np.linspace(0, 1, 5):
        xv = x_lo + t * (x_hi - x_lo)
        yv = y_lo + t * (y_hi - y_lo)
        parts.append(
            f'<text x="{sx(xv):.1f}" y="{height - margin + 18}" text-anchor="middle" '
            f'font-size="11">{xv:.4g}</text>'
        )
        parts.append(
            f'<text x="{margin - 8}" y="{sy(yv):.1f}" text-anchor="end" '
            f'font-size="11">{yv:.4g}</text>'
        )
    for k, (name, xs, ys) in enumerate(series):
        color = colors[k % len(colors)]
        pts = [
            (sx(float(x)), sy(float(y)))
            for x, y in zip(xs, ys)
            if np.isfinite(x) and np.isfinite(y)
        ]
        if len(pts) > 1:
            path_d = " ".join(f"{px:.2f},{py:.2f}" for px, py in pts)
            parts.append(
                f'<polyline points="{path_d}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        for px, py in pts:
            parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3" fill="{color}"/>')
        parts.append(
            f'<text x="{width - margin + 4}" y="{margin + 16 * k}" font-size="12" '
            f'fill="{color}" text-anchor="end">{name}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
