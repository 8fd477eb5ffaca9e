"""SVG pictures of the extension as the image of a coordinate grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qcx.boundary_map import TWO_PI, CircleHomeo, LineHomeo
from qcx.extension import extend, extend_circle


@dataclass(frozen=True)
class RenderSpec:
    domain: str = "halfplane"            # or "disk"
    window: tuple = (-2.0, 2.0, 0.05, 2.0)
    lines: tuple = (17, 12)              # vertical x horizontal, or rays x circles
    samples: int = 200
    stroke: float = 1.0
    size: int = 800

    def __post_init__(self):
        if self.domain not in ("halfplane", "disk"):
            raise ValueError(f"unknown render domain {self.domain!r}")
        if min(self.lines) < 1 or self.samples < 2 or self.stroke <= 0 or self.size < 16:
            raise ValueError("render counts and sizes must be positive")
        x0, x1, y0, y1 = self.window
        if self.domain == "halfplane" and not (x0 < x1 and 0 < y0 < y1):
            raise ValueError("render window needs x0 < x1 and 0 < y0 < y1")


def _f(v: float) -> str:
    s = f"{v:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("", "-0") else s


def _polyline(pts, color, stroke):
    coords = " ".join(f"{_f(a)},{_f(b)}" for a, b in pts)
    return (f'<polyline fill="none" stroke="{color}" stroke-width="{_f(stroke)}" '
            f'vector-effect="non-scaling-stroke" points="{coords}"/>')


def _document(groups, bounds, size):
    u0, u1, w0, w1 = bounds
    span = max(u1 - u0, w1 - w0, 1e-12)
    pad = 0.03 * span
    vb = (u0 - pad, w0 - pad, (u1 - u0) + 2 * pad, (w1 - w0) + 2 * pad)
    scale = size / max(vb[2], vb[3])
    width, height = round(vb[2] * scale), round(vb[3] * scale)
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="{" ".join(_f(v) for v in vb)}">']
    for name, lines in groups:
        out.append(f'<g id="{name}">')
        out.extend(lines)
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_halfplane(h: LineHomeo, spec: RenderSpec = RenderSpec()) -> str:
    """Images of the lines x = const and y = const of ``spec.window`` under H,
    drawn with the image y-axis pointing up."""
    x0, x1, y0, y1 = spec.window
    nv, nh = spec.lines
    s = np.linspace(0.0, 1.0, spec.samples)
    xs = np.linspace(x0, x1, nv)
    ys = np.linspace(y0, y1, nh)
    groups = {"vertical": [], "horizontal": []}
    allpts = []
    for name, fixed, moving in (("vertical", xs, y0 + (y1 - y0) * s),
                                ("horizontal", ys, x0 + (x1 - x0) * s)):
        for c in fixed:
            if name == "vertical":
                u, v = extend(h, np.full_like(moving, c), moving)
            else:
                u, v = extend(h, moving, np.full_like(moving, c))
            pts = np.column_stack([u, -v])
            allpts.append(pts)
            groups[name].append(_polyline(pts, "#1f4e79" if name == "vertical" else "#b03a2e",
                                          spec.stroke))
    P = np.vstack(allpts)
    bounds = (P[:, 0].min(), P[:, 0].max(), P[:, 1].min(), P[:, 1].max())
    return _document(list(groups.items()), bounds, spec.size)


def render_disk(ch: CircleHomeo, spec: RenderSpec = RenderSpec(domain="disk")) -> str:
    """Images of rays and concentric circles of the unit disk under the
    extension of a circle map, with the unit circle for reference."""
    n_rays, n_circles = spec.lines
    s = np.linspace(0.0, 1.0, spec.samples)
    groups = {"boundary": [], "rays": [], "circles": []}
    theta = TWO_PI * s
    groups["boundary"].append(_polyline(np.column_stack([np.cos(theta), -np.sin(theta)]),
                                        "#999999", spec.stroke))
    r_max = 1.0 - 1.0 / (4.0 * n_circles + 4.0)
    for k in range(n_rays):
        ang = TWO_PI * k / n_rays
        z = r_max * s * np.exp(1j * ang)
        w = extend_circle(ch, z)
        groups["rays"].append(_polyline(np.column_stack([w.real, -w.imag]), "#1f4e79",
                                        spec.stroke))
    for k in range(1, n_circles + 1):
        r = r_max * k / n_circles
        w = extend_circle(ch, r * np.exp(1j * theta))
        groups["circles"].append(_polyline(np.column_stack([w.real, -w.imag]), "#b03a2e",
                                           spec.stroke))
    return _document(list(groups.items()), (-1.0, 1.0, -1.0, 1.0), spec.size)


def render(h, spec: RenderSpec) -> str:
    if isinstance(h, CircleHomeo):
        return render_disk(h, spec)
    return render_halfplane(h, spec)
