"""Deterministic SVG rendering of planar sets, orbits, and cones.

Output is a plain string assembled with fixed 3-decimal coordinate
formatting and no timestamps or ids, so identical inputs produce
byte-identical files.  The set region is rasterized by testing cell centers
of a square grid and merging horizontal runs into rectangles; orbits are
polylines; cones are translucent triangles reaching the edge of the viewport
(the viewport clips them).
"""

from __future__ import annotations

import numpy as np

from .boxset import BoxLipschitzSet, violation_many
from .metric import ConeDescriptor

__all__ = ["render_scene"]

REGION_FILL = "#9ecae1"
CONE_FILL = "#fdae6b"
ORBIT_STROKE = "#d62728"
FRAME_STROKE = "#444444"
MEMBER_TOL = 1e-9


def _fmt(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def render_scene(box, Q: BoxLipschitzSet = None, orbit=None, cones=None,
                 resolution: float = 0.05, width: int = 480) -> str:
    """Render a planar scene into an SVG string.

    ``box`` is ``((x0, x1), (y0, y1))`` in data coordinates; ``Q`` (optional)
    must be 2-dimensional; ``orbit`` is a point sequence drawn as a
    polyline; ``cones`` is a sequence of planar :class:`ConeDescriptor`.
    """
    (x0, x1), (y0, y1) = [(float(a), float(b)) for a, b in box]
    if not (x0 < x1 and y0 < y1):
        raise ValueError("box sides must have positive length")
    if Q is not None and Q.n != 2:
        raise ValueError(f"plotting needs a planar set, got dimension {Q.n}")
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    span_x = x1 - x0
    span_y = y1 - y0
    height = width * span_y / span_x

    def sx(v):
        return (v - x0) / span_x * width

    def sy(v):
        return height - (v - y0) / span_y * height

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">'
    ]

    if Q is not None:
        nx = max(1, int(round(span_x / resolution)))
        ny = max(1, int(round(span_y / resolution)))
        cx = x0 + (np.arange(nx) + 0.5) * span_x / nx
        cy = y0 + (np.arange(ny) + 0.5) * span_y / ny
        cell_w = width / nx
        cell_h = height / ny
        for iy in range(ny):
            row = np.column_stack([cx, np.full(nx, cy[iy])])
            member = violation_many(Q, row) <= MEMBER_TOL
            ix = 0
            while ix < nx:
                if not member[ix]:
                    ix += 1
                    continue
                run = ix
                while run < nx and member[run]:
                    run += 1
                parts.append(
                    f'<rect x="{_fmt(ix * cell_w)}" y="{_fmt(sy(cy[iy]) - cell_h / 2)}" '
                    f'width="{_fmt((run - ix) * cell_w)}" height="{_fmt(cell_h)}" '
                    f'fill="{REGION_FILL}"/>')
                ix = run

    for cone in cones or ():
        if not isinstance(cone, ConeDescriptor) or len(cone.apex) != 2:
            raise ValueError(f"need planar cones, got {cone!r}")
        ax, ay = cone.apex
        reach = 2.0 * max(span_x, span_y)
        tip_x = ax + cone.sign * reach if cone.axis == 0 else ax
        tip_y = ay + cone.sign * reach if cone.axis == 1 else ay
        if cone.axis == 0:
            corners = [(tip_x, ay + reach), (tip_x, ay - reach)]
        else:
            corners = [(ax + reach, tip_y), (ax - reach, tip_y)]
        pts = [(ax, ay)] + corners
        path = " ".join(f"{_fmt(sx(px))},{_fmt(sy(py))}" for px, py in pts)
        parts.append(f'<polygon points="{path}" fill="{CONE_FILL}" fill-opacity="0.5"/>')

    if orbit:
        path = " ".join(f"{_fmt(sx(px))},{_fmt(sy(py))}" for px, py in orbit)
        parts.append(
            f'<polyline points="{path}" fill="none" stroke="{ORBIT_STROKE}" '
            f'stroke-width="1.5"/>')

    parts.append(
        f'<rect x="0.000" y="0.000" width="{_fmt(width)}" height="{_fmt(height)}" '
        f'fill="none" stroke="{FRAME_STROKE}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
