"""Plain SVG 1.1 output for level sets of the shape function."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .shape import LevelSet

SIZE = 1000
MARGIN = 80


def level_set_svg(ls: LevelSet, intercepts: tuple[float, float] | None = None) -> str:
    """Polyline of the level curve in a 1000x1000 viewport, with axes and cone rays.

    ``intercepts`` are the axis crossings (s0, t0) of the level curve; any
    finite ones are appended to the two ends of the polyline.
    """
    pts = list(zip(ls.s.tolist(), ls.t.tolist()))
    s0, t0 = intercepts if intercepts is not None else (math.inf, math.inf)
    if math.isfinite(s0):
        pts.insert(0, (s0, 0.0))
    if math.isfinite(t0):
        pts.append((0.0, t0))
    extent = 1.05 * max(max(p[0] for p in pts), max(p[1] for p in pts))
    scale = (SIZE - 2 * MARGIN) / extent

    def X(s):
        return MARGIN + s * scale

    def Y(t):
        return SIZE - MARGIN - t * scale

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">',
        f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>',
        f'<line x1="{X(0):.3f}" y1="{Y(0):.3f}" x2="{X(extent):.3f}" y2="{Y(0):.3f}" stroke="black" stroke-width="2"/>',
        f'<line x1="{X(0):.3f}" y1="{Y(0):.3f}" x2="{X(0):.3f}" y2="{Y(extent):.3f}" stroke="black" stroke-width="2"/>',
        f'<text x="{X(extent) - 10:.3f}" y="{Y(0) + 30:.3f}" font-size="24" font-family="sans-serif">s</text>',
        f'<text x="{X(0) - 30:.3f}" y="{Y(extent) + 10:.3f}" font-size="24" font-family="sans-serif">t</text>',
    ]
    for name, c in zip(("c1", "c2"), (ls.cone.c1, ls.cone.c2) if ls.cone else ()):
        if not (0 < c < math.inf):
            continue
        # ray s = c t, clipped to the square
        t_end = extent / max(c, 1.0)
        s_end = c * t_end
        out.append(
            f'<line x1="{X(0):.3f}" y1="{Y(0):.3f}" x2="{X(s_end):.3f}" y2="{Y(t_end):.3f}" '
            'stroke="gray" stroke-width="1.5" stroke-dasharray="8,6"/>'
        )
        label = escape(f"{name} = {c:.6g}")
        out.append(
            f'<text x="{X(s_end) - 150:.3f}" y="{Y(t_end) + 24:.3f}" font-size="20" font-family="sans-serif" fill="gray">{label}</text>'
        )
    coords = " ".join(f"{X(s):.3f},{Y(t):.3f}" for s, t in pts)
    out.append(f'<polyline points="{coords}" fill="none" stroke="navy" stroke-width="2.5"/>')
    out.append(
        f'<text x="{SIZE / 2 - 60:.3f}" y="{MARGIN / 2:.3f}" font-size="24" font-family="sans-serif">'
        f"{escape(f'g = {ls.level:g}')}</text>"
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"
