"""Deterministic SVG drawings of instances, helper sets and solutions."""

from __future__ import annotations

from typing import Iterable, Sequence

from .geom import Point
from .instance import Instance

SCALE = 100.0
MARGIN = 1.2


def _fmt(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _bounds(instance: Instance) -> tuple[float, float, float, float]:
    xs = [d.center.x for d in instance.disks] + [p.x for p in instance.points]
    ys = [d.center.y for d in instance.disks] + [p.y for p in instance.points]
    if not xs:
        return (0.0, 0.0, 1.0, 1.0)
    return (min(xs) - MARGIN, min(ys) - MARGIN, max(xs) + MARGIN, max(ys) + MARGIN)


def render_svg(instance: Instance, solution: Iterable[int] = (), helper: Iterable[int] = (),
               baselines: Sequence[Sequence[Point]] = (), title: str = "",
               regions: Sequence[Sequence[Point]] = (), envelopes: Sequence[Sequence[Point]] = ()) -> str:
    """Layered SVG: all disks, shaded active regions, helper disks dashed, baselines,
    envelopes, chosen disks highlighted, then points.

    The y axis is flipped so that the picture matches the usual math orientation.
    """
    x0, y0, x1, y1 = _bounds(instance)
    w, h = (x1 - x0) * SCALE, (y1 - y0) * SCALE

    def X(x: float) -> str:
        return _fmt((x - x0) * SCALE)

    def Y(y: float) -> str:
        return _fmt((y1 - y) * SCALE)

    chosen, helper = set(solution), set(helper)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(w)}" height="{_fmt(h)}" '
        f'viewBox="0 0 {_fmt(w)} {_fmt(h)}">',
    ]
    if title:
        out.append(f"<title>{_escape(title)}</title>")
    out.append('<rect width="100%" height="100%" fill="white"/>')
    out.append('<g id="disks" fill="none" stroke="#999999" stroke-width="1">')
    for d in sorted(instance.disks, key=lambda d: d.id):
        out.append(f'<circle id="d{d.id}" cx="{X(d.center.x)}" cy="{Y(d.center.y)}" r="{_fmt(SCALE)}"/>')
    out.append("</g>")
    out.append('<g id="regions" fill="#f2c14e" fill-opacity="0.45" stroke="none">')
    for poly in regions:
        if len(poly) >= 3:
            pts = " ".join(f"{X(p[0])},{Y(p[1])}" for p in poly)
            out.append(f'<polygon points="{pts}"/>')
    out.append("</g>")
    out.append('<g id="helper" fill="none" stroke="#1f5fbf" stroke-width="1.5" stroke-dasharray="6 4">')
    for d in sorted(instance.disks, key=lambda d: d.id):
        if d.id in helper:
            out.append(f'<circle cx="{X(d.center.x)}" cy="{Y(d.center.y)}" r="{_fmt(SCALE)}"/>')
    out.append("</g>")
    out.append('<g id="baselines" fill="none" stroke="#2a9d3a" stroke-width="2.5">')
    for line in baselines:
        if len(line) >= 2:
            pts = " ".join(f"{X(p[0])},{Y(p[1])}" for p in line)
            out.append(f'<polyline points="{pts}"/>')
    out.append("</g>")
    out.append('<g id="envelopes" fill="none" stroke="#7b2cbf" stroke-width="1.5">')
    for line in envelopes:
        if len(line) >= 2:
            pts = " ".join(f"{X(p[0])},{Y(p[1])}" for p in line)
            out.append(f'<polyline points="{pts}"/>')
    out.append("</g>")
    out.append('<g id="solution" fill="#d9480f" fill-opacity="0.08" stroke="#d9480f" stroke-width="2">')
    for d in sorted(instance.disks, key=lambda d: d.id):
        if d.id in chosen:
            out.append(f'<circle cx="{X(d.center.x)}" cy="{Y(d.center.y)}" r="{_fmt(SCALE)}"/>')
    out.append("</g>")
    out.append('<g id="points" fill="black">')
    for p in instance.points:
        out.append(f'<circle cx="{X(p.x)}" cy="{Y(p.y)}" r="2.5"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
