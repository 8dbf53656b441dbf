"""Static SVG pictures of the frequency plane.

Output is deterministic: fixed element order and 12 significant digits.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from ..bilinear_lp import ParallelogramFamily, StripFamily
from .geometry import Collection

SIZE = 480
PALETTE = ("#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377", "#bbbbbb")


def _num(v: float) -> str:
    return f"{float(v):.12g}"


def _header(width: int, height: int, title: str) -> list[str]:
    return [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">',
            f"<title>{title}</title>",
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>']


def _clip(poly: list, a: float, b: float, c: float) -> list:
    """Keep the part of a convex polygon where a*x + b*y <= c."""
    out = []
    for k in range(len(poly)):
        p, q = poly[k], poly[(k + 1) % len(poly)]
        fp, fq = a * p[0] + b * p[1] - c, a * q[0] + b * q[1] - c
        if fp <= 0:
            out.append(p)
        if fp * fq < 0:
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


class _Frame:
    """Maps the box [lo, hi]^2 of the frequency plane to pixels, xi2 pointing up."""

    def __init__(self, lo: float, hi: float, size: int = SIZE, margin: int = 20):
        self.lo, self.hi, self.size, self.margin = lo, hi, size, margin
        self.scale = (size - 2 * margin) / (hi - lo)

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        return (self.margin + (x - self.lo) * self.scale, self.size - self.margin - (y - self.lo) * self.scale)

    def box(self) -> list:
        return [(self.lo, self.lo), (self.hi, self.lo), (self.hi, self.hi), (self.lo, self.hi)]

    def polygon(self, pts, fill: str, opacity: float = 0.35, stroke: str = "none") -> str:
        if len(pts) < 3:
            return ""
        s = " ".join(f"{_num(u)},{_num(v)}" for u, v in (self(x, y) for x, y in pts))
        return f'<polygon points="{s}" fill="{fill}" fill-opacity="{opacity}" stroke="{stroke}"/>'

    def axes(self) -> list[str]:
        x0, y0 = self(self.lo, 0.0)
        x1, _ = self(self.hi, 0.0)
        u0, v0 = self(0.0, self.lo)
        _, v1 = self(0.0, self.hi)
        return [f'<line x1="{_num(x0)}" y1="{_num(y0)}" x2="{_num(x1)}" y2="{_num(y0)}" stroke="black"/>',
                f'<line x1="{_num(u0)}" y1="{_num(v0)}" x2="{_num(u0)}" y2="{_num(v1)}" stroke="black"/>']


def strips_svg(strips: StripFamily, half_width: float, coll: Collection | None = None, size: int = SIZE) -> str:
    """Strips a_n <= xi1 - xi2 < b_n in the (xi1, xi2) plane, in frequency units.

    When a collection is given, the squares omega_1 x omega_2 of its
    reference tri-tiles are drawn on top.
    """
    fr = _Frame(-half_width, half_width, size)
    out = _header(size, size, "strips")
    for n in range(strips.n_min, strips.n_max + 1):
        a = float(strips.a0 + n * strips.period)
        b = a + float(strips.width)
        # a <= x - y  and  x - y < b
        poly = _clip(_clip(fr.box(), -1.0, 1.0, -a), 1.0, -1.0, b)
        out.append(fr.polygon(poly, PALETTE[n % 2]))
    if coll is not None:
        base = coll.base
        L = base.grid.period
        for b in coll.reference():
            x0, x1 = base.lo[b, 0] / L, (base.lo[b, 0] + base.w[b]) / L
            y0, y1 = base.lo[b, 1] / L, (base.lo[b, 1] + base.w[b]) / L
            out.append(fr.polygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)], "none", 1.0, "#222222"))
    out.extend(fr.axes())
    out.append("</svg>")
    return "\n".join(x for x in out if x) + "\n"


def parallelograms_svg(fam: ParallelogramFamily, half_width: float, size: int = SIZE) -> str:
    """Cells a_n <= xi2 - tan1 xi1 < b_n, c_p <= xi2 - tan2 xi1 < d_p, clipped to the box."""
    fr = _Frame(-half_width, half_width, size)
    out = _header(size, size, "parallelograms")
    t1, t2 = float(fam.tan1), float(fam.tan2)
    for n, p in fam.cells():
        a = float(fam.first.start + n * fam.first.period)
        b = a + float(fam.first.width)
        c = float(fam.second.start + p * fam.second.period)
        d = c + float(fam.second.width)
        poly = fr.box()
        poly = _clip(poly, t1, -1.0, -a)
        poly = _clip(poly, -t1, 1.0, b)
        poly = _clip(poly, t2, -1.0, -c)
        poly = _clip(poly, -t2, 1.0, d)
        out.append(fr.polygon(poly, PALETTE[(n + p) % 2]))
    out.extend(fr.axes())
    out.append("</svg>")
    return "\n".join(x for x in out if x) + "\n"


def ratio_curves_svg(curves: Mapping[str, Sequence[tuple[float, float]]], loglog: bool = True,
                     size: int = SIZE) -> str:
    """One polyline per labelled curve, in log-log coordinates by default."""
    out = _header(size, size, "ratio curves")
    pts = {k: [(math.log(x), math.log(y)) if loglog else (float(x), float(y)) for x, y in v]
           for k, v in curves.items()}
    allp = [p for v in pts.values() for p in v]
    if not allp:
        out.append("</svg>")
        return "\n".join(out) + "\n"
    xs, ys = np.array([p[0] for p in allp]), np.array([p[1] for p in allp])
    m = 40
    xr = (xs.max() - xs.min()) or 1.0
    yr = (ys.max() - ys.min()) or 1.0

    def px(x, y):
        return m + (x - xs.min()) / xr * (size - 2 * m), size - m - (y - ys.min()) / yr * (size - 2 * m)

    for k, label in enumerate(sorted(pts)):
        colour = PALETTE[k % len(PALETTE)]
        line = " ".join(f"{_num(u)},{_num(v)}" for u, v in (px(x, y) for x, y in pts[label]))
        out.append(f'<polyline points="{line}" fill="none" stroke="{colour}" stroke-width="2">'
                   f"<title>{label}</title></polyline>")
        out.append(f'<text x="{m}" y="{m / 2 + 14 * k}" fill="{colour}" font-size="12">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
