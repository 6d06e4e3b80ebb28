"""Self-contained log-log SVG convergence plots.

Output bytes depend only on the input data: coordinates are printed with a
fixed number of decimals and no timestamps or random ids are emitted.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 440
MARGIN = (70, 20, 30, 50)  # left, right, top, bottom
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
GUIDE_COLOR = "#888888"


def _decades(lo: float, hi: float) -> list[int]:
    return list(range(math.floor(lo), math.ceil(hi) + 1))


def loglog_svg(curves, column: str = "gap", guides=(1, 2)) -> str:
    """SVG text with one polyline per ``(label, t, values)`` curve.

    Nonpositive or non-finite values are skipped.  For each exponent ``k`` in
    ``guides`` a dashed line ``c t^-k`` is drawn through the first point of
    the first curve.
    """
    cleaned = []
    for label, t, v in curves:
        t, v = np.asarray(t, float), np.abs(np.asarray(v, float))
        keep = (t > 0) & (v > 0) & np.isfinite(v)
        if keep.sum() < 2:
            raise ValueError(f"curve {label!r} has fewer than 2 plottable points")
        cleaned.append((label, np.log10(t[keep]), np.log10(v[keep])))
    if not cleaned:
        raise ValueError("nothing to plot")

    xs = np.concatenate([c[1] for c in cleaned])
    ys = np.concatenate([c[2] for c in cleaned])
    x0, x1 = math.floor(xs.min()), math.ceil(xs.max())
    y0, y1 = math.floor(ys.min()), math.ceil(ys.max())
    x1 = max(x1, x0 + 1)
    y1 = max(y1, y0 + 1)
    left, right, top, bottom = MARGIN
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom

    def px(lx):
        return left + (lx - x0) / (x1 - x0) * pw

    def py(ly):
        return top + (y1 - ly) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<clipPath id="plotarea"><rect x="{left}" y="{top}" width="{pw}" height="{ph}"/>'
        "</clipPath>",
    ]
    for d in _decades(x0, x1):
        out.append(f'<line class="grid" x1="{px(d):.2f}" y1="{top}" x2="{px(d):.2f}" '
                   f'y2="{top + ph}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{px(d):.2f}" y="{top + ph + 18}" text-anchor="middle">'
                   f"1e{d}</text>")
    for d in _decades(y0, y1):
        out.append(f'<line class="grid" x1="{left}" y1="{py(d):.2f}" x2="{left + pw}" '
                   f'y2="{py(d):.2f}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{left - 6}" y="{py(d) + 4:.2f}" text-anchor="end">1e{d}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" '
               'stroke="black"/>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{HEIGHT - 10}" text-anchor="middle">t</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2:.2f})">{escape(column)}</text>')

    ax, ay = cleaned[0][1][0], cleaned[0][2][0]
    for k in guides:
        # line through (ax, ay) with slope -k in log-log coordinates
        pts = [(x, ay - k * (x - ax)) for x in (x0, x1)]
        out.append(f'<polyline class="guide" clip-path="url(#plotarea)" fill="none" '
                   f'stroke="{GUIDE_COLOR}" stroke-dasharray="6,4" points="'
                   + " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in pts) + '"/>')
        lx = min(x1, ax + 1.0)
        out.append(f'<text x="{px(lx):.2f}" y="{py(ay - k * (lx - ax)) - 4:.2f}" '
                   f'fill="{GUIDE_COLOR}">t^-{k}</text>')

    for i, (label, lx, ly) in enumerate(cleaned):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(lx, ly))
        out.append(f'<polyline class="curve" fill="none" stroke="{color}" '
                   f'stroke-width="1.5" points="{pts}"/>')
        ty = top + 16 + 16 * i
        out.append(f'<line x1="{left + pw - 150}" y1="{ty - 4}" x2="{left + pw - 130}" '
                   f'y2="{ty - 4}" stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{left + pw - 125}" y="{ty}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
