"""Deterministic SVG rendering of patches, lattice overlays, and witnesses.

No timestamps, no randomness, fixed coordinate formatting: identical inputs
give byte-identical documents (style version bumps on any visual change).
"""

from __future__ import annotations

import numpy as np

from .errors import TooManyPoints

STYLE_VERSION = "1"
MAX_POINTS = 100_000

_POINT_COLORS = ["#1f4e79", "#8c2d2d", "#2d6e2d", "#6a3d9a"]
_CROSS_COLORS = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd"]


def _fmt(v: float) -> str:
    out = f"{v:.6f}"
    return "0.000000" if out == "-0.000000" else out


def render_svg(window_radius: float, *, point_layers=(), cross_layers=(),
               rectangles=(), size: int = 720) -> str:
    """Compose an SVG document.

    point_layers: iterables of (label, (N,2) array) drawn as filled circles.
    cross_layers: iterables of (label, (N,2) array) drawn as x-crosses.
    rectangles:   iterables of (label, corners (4,2) array) drawn as outlines.
    """
    total = sum(len(pts) for _, pts in point_layers) + sum(
        len(pts) for _, pts in cross_layers
    )
    if total > MAX_POINTS:
        raise TooManyPoints(f"{total} points exceed the SVG budget {MAX_POINTS}")
    w = float(window_radius)
    pad = 0.05 * w + 0.5
    half = w + pad
    glyph = max(w / 220.0, 0.02)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="{_fmt(-half)} {_fmt(-half)} {_fmt(2 * half)} {_fmt(2 * half)}" '
        f'data-style-version="{STYLE_VERSION}">',
        f'<g transform="scale(1,-1)">',
        f'<circle cx="0" cy="0" r="{_fmt(w)}" fill="none" stroke="#999999" '
        f'stroke-width="{_fmt(glyph / 2)}"/>',
    ]
    for li, (label, pts) in enumerate(point_layers):
        color = _POINT_COLORS[li % len(_POINT_COLORS)]
        lines.append(f'<g class="points" data-label="{label}" fill="{color}">')
        for p in np.asarray(pts, dtype=np.float64).reshape(-1, 2):
            lines.append(
                f'<circle cx="{_fmt(p[0])}" cy="{_fmt(p[1])}" r="{_fmt(glyph)}"/>'
            )
        lines.append("</g>")
    for li, (label, pts) in enumerate(cross_layers):
        color = _CROSS_COLORS[li % len(_CROSS_COLORS)]
        arm = glyph * 1.8
        lines.append(
            f'<g class="crosses" data-label="{label}" stroke="{color}" '
            f'stroke-width="{_fmt(glyph / 2)}">'
        )
        for p in np.asarray(pts, dtype=np.float64).reshape(-1, 2):
            x, y = p[0], p[1]
            lines.append(
                f'<path d="M {_fmt(x - arm)} {_fmt(y - arm)} L {_fmt(x + arm)} {_fmt(y + arm)} '
                f'M {_fmt(x - arm)} {_fmt(y + arm)} L {_fmt(x + arm)} {_fmt(y - arm)}"/>'
            )
        lines.append("</g>")
    for label, corners in rectangles:
        pts = " ".join(
            f"{_fmt(c[0])},{_fmt(c[1])}" for c in np.asarray(corners).reshape(-1, 2)
        )
        lines.append(
            f'<polygon class="witness" data-label="{label}" points="{pts}" '
            f'fill="none" stroke="#000000" stroke-width="{_fmt(glyph)}"/>'
        )
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
