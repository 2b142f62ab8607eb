"""Minimal SVG line charts written straight from arrays."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def render(x, series: dict, title: str = "", width: int = 640, height: int = 400) -> str:
    x = np.asarray(x, dtype=float)
    pad_l, pad_r, pad_t, pad_b = 70, 150, 30, 40
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b
    ys = [np.asarray(v, dtype=float) for v in series.values()]
    finite = np.concatenate([y[np.isfinite(y)] for y in ys] + [np.zeros(0)])
    ylo, yhi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if yhi == ylo:
        ylo, yhi = ylo - 1.0, yhi + 1.0
    xlo, xhi = float(np.nanmin(x)), float(np.nanmax(x))
    if xhi == xlo:
        xlo, xhi = xlo - 1.0, xhi + 1.0

    def sx(v):
        return pad_l + (v - xlo) / (xhi - xlo) * pw

    def sy(v):
        return pad_t + (yhi - v) / (yhi - ylo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           f'<rect x="{pad_l}" y="{pad_t}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>',
           f'<text x="{pad_l}" y="{pad_t - 10}" font-size="13">{escape(title)}</text>']
    for v, anchor_y in ((yhi, pad_t), (ylo, pad_t + ph)):
        out.append(f'<text x="{pad_l - 5}" y="{anchor_y + 4:.1f}" font-size="10" text-anchor="end">{v:.3g}</text>')
    for v, anchor_x in ((xlo, pad_l), (xhi, pad_l + pw)):
        out.append(f'<text x="{anchor_x:.1f}" y="{pad_t + ph + 15}" font-size="10" text-anchor="middle">{v:.3g}</text>')
    for k, (name, y) in enumerate(zip(series, ys)):
        color = _COLORS[k % len(_COLORS)]
        ok = np.isfinite(y) & np.isfinite(x)
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x[ok], y[ok]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = pad_t + 15 + 18 * k
        out.append(f'<text x="{pad_l + pw + 10}" y="{ly}" font-size="12" fill="{color}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write(path, x, series: dict, title: str = "") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render(x, series, title))
    return path
