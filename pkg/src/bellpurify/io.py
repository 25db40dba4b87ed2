"""Flat-file output: CSV with round-trip-exact floats and a bare SVG line plot."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape


def fmt(x) -> str:
    """Render a cell.  Floats use ``repr`` so they parse back bit-identically."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float) or hasattr(x, "dtype") and getattr(x.dtype, "kind", "") == "f":
        return repr(float(x))
    if hasattr(x, "dtype"):
        return str(x.item())
    return str(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([fmt(x) for x in row])
    return path


_COLORS = ("#0072B2", "#E69F00", "#009E73", "#D55E00", "#CC79A7", "#56B4E9", "#000000")


def write_line_svg(path, x, series: dict, *, xlabel: str = "", ylabel: str = "",
                   title: str = "", width: int = 640, height: int = 420) -> Path:
    """Write a polyline plot of ``series`` (label -> y values) against ``x``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    margin_l, margin_r, margin_t, margin_b = 60, 130, 36, 48
    pw, ph = width - margin_l - margin_r, height - margin_t - margin_b
    xs = [float(v) for v in x]
    x0, x1 = min(xs), max(xs)
    y1 = max(max(float(v) for v in ys) for ys in series.values())
    y1 = y1 if y1 > 0 else 1.0
    sx = lambda v: margin_l + pw * (v - x0) / (x1 - x0 or 1.0)
    sy = lambda v: margin_t + ph * (1.0 - v / y1)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{margin_l}" y1="{margin_t + ph}" x2="{margin_l + pw}" y2="{margin_t + ph}" stroke="black"/>',
        f'<line x1="{margin_l}" y1="{margin_t}" x2="{margin_l}" y2="{margin_t + ph}" stroke="black"/>',
    ]
    for i in range(6):
        xv = x0 + (x1 - x0) * i / 5
        yv = y1 * i / 5
        parts.append(f'<text x="{sx(xv):.2f}" y="{margin_t + ph + 16}" font-size="11" '
                     f'text-anchor="middle">{xv:.3g}</text>')
        parts.append(f'<text x="{margin_l - 6}" y="{sy(yv) + 4:.2f}" font-size="11" '
                     f'text-anchor="end">{yv:.3g}</text>')
    if xlabel:
        parts.append(f'<text x="{margin_l + pw / 2}" y="{height - 10}" font-size="13" '
                     f'text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        parts.append(f'<text x="16" y="{margin_t + ph / 2}" font-size="13" text-anchor="middle" '
                     f'transform="rotate(-90 16 {margin_t + ph / 2})">{escape(ylabel)}</text>')
    if title:
        parts.append(f'<text x="{margin_l + pw / 2}" y="20" font-size="14" '
                     f'text-anchor="middle">{escape(title)}</text>')
    for i, (label, ys) in enumerate(series.items()):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{sx(a):.2f},{sy(float(b)):.2f}" for a, b in zip(xs, ys))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = margin_t + 16 * i + 8
        parts.append(f'<line x1="{width - margin_r + 10}" y1="{ly}" x2="{width - margin_r + 30}" '
                     f'y2="{ly}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{width - margin_r + 34}" y="{ly + 4}" font-size="11">{escape(str(label))}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return path
