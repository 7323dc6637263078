"""Static SVG and CSV figures.

Everything here is a pure function of its inputs (and the seed), so repeated
runs produce byte-identical files.
"""
from __future__ import annotations

import io
import math
from xml.sax.saxutils import escape

import numpy as np

from .ifs import Ifs
from .projection import Direction, Gap, decide_interval, induce_system, refine_cover, solve_hull

WIDTH = 640


def _f(x: float) -> str:
    return f"{x:.4f}"


def _svg(width, height, body, title):
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f"<title>{escape(title)}</title>\n"
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def _arc_path(cx, cy, rad, a, b):
    """Filled sector of the upper half-disc between angles ``a < b``."""
    x0, y0 = cx + rad * math.cos(a), cy - rad * math.sin(a)
    x1, y1 = cx + rad * math.cos(b), cy - rad * math.sin(b)
    large = 1 if b - a > math.pi else 0
    return (f"M {_f(cx)} {_f(cy)} L {_f(x0)} {_f(y0)} "
            f"A {_f(rad)} {_f(rad)} 0 {large} 0 {_f(x1)} {_f(y1)} Z")


def render_angle_diagram(report) -> str:
    """Half-circle picture of angle space for an :class:`IPReport`."""
    w, h = WIDTH, WIDTH // 2 + 60
    cx, cy, rad = w / 2, WIDTH / 2 + 10, WIDTH / 2 - 40
    body = [f'<path d="{_arc_path(cx, cy, rad, 0.0, math.pi)}" fill="#f4f4f4" stroke="#888"/>']
    if report.shortcut == "infinite-rotation-group":
        body.append(f'<path d="{_arc_path(cx, cy, rad, 0.0, math.pi)}" fill="#d9d9d9" stroke="#888"/>')
        body.append(f'<text x="{_f(cx)}" y="{_f(cy - rad / 2)}" text-anchor="middle" '
                    'font-family="sans-serif" font-size="18">no interval projections</text>')
    for e in report.excluded:
        body.append(f'<path d="{_arc_path(cx, cy, rad, e.lo_rad, e.hi_rad)}" fill="#c6d9ec" stroke="none"/>')
    for a, b in report.certified_arcs:
        body.append(f'<path d="{_arc_path(cx, cy, rad, a, b)}" fill="#c7e9c0" stroke="none"/>')
    for a, b in report.undecided:
        body.append(f'<path d="{_arc_path(cx, cy, rad, a, b)}" fill="#e6550d" stroke="none"/>')
    longest = max([c.length for c in report.certified] + [1e-300])
    for c in report.certified:
        frac = c.length / longest if longest > 0 else 0.0
        x = cx + rad * frac * math.cos(c.theta_rad)
        y = cy - rad * frac * math.sin(c.theta_rad)
        body.append(f'<line x1="{_f(cx)}" y1="{_f(cy)}" x2="{_f(x)}" y2="{_f(y)}" '
                    'stroke="#1a1a1a" stroke-width="2"/>')
        lx = cx + (rad + 14) * math.cos(c.theta_rad)
        ly = cy - (rad + 14) * math.sin(c.theta_rad)
        body.append(f'<text x="{_f(lx)}" y="{_f(ly)}" text-anchor="middle" font-family="sans-serif" '
                    f'font-size="11">t={escape(c.t)} L={c.length:.4g}</text>')
    body.append(f'<text x="10" y="{h - 12}" font-family="sans-serif" font-size="12">'
                f'{escape(report.name or "")} certified={len(report.certified)} '
                f'residue={report.residue_rad:.3g} rad</text>')
    return _svg(w, h, body, f"angle diagram {report.name}")


def _random_words(m, depth, n, seed):
    rng = np.random.default_rng(seed)
    return rng.integers(0, m, size=(n, depth))


def attractor_points(ifs: Ifs, depth: int = 12, n: int = 2000, seed: int = 0) -> np.ndarray:
    """Images of a fixed point under ``n`` random words of length ``depth``."""
    maps = ifs.maps
    r = np.array([float(s.ratio) for s in maps])
    rot = np.array([[float(c) for c in s.rot] for s in maps])
    v = np.array([[float(c) for c in s.v] for s in maps])
    p0 = np.array([float(c) for c in maps[0].fixed_point()])
    words = _random_words(len(maps), depth, n, seed)
    pts = np.tile(p0, (n, 1))
    # apply the innermost map first: S_{w1} o ... o S_{wk} (p0)
    for k in range(depth - 1, -1, -1):
        idx = words[:, k]
        t = rot[idx]
        x = t[:, 0] * pts[:, 0] + t[:, 1] * pts[:, 1]
        y = t[:, 2] * pts[:, 0] + t[:, 3] * pts[:, 1]
        pts = np.stack([r[idx] * x + v[idx, 0], r[idx] * y + v[idx, 1]], axis=1)
    return pts


def points_csv(points) -> str:
    out = io.StringIO()
    out.write("x,y\n")
    for x, y in points:
        out.write(f"{float(x)!r},{float(y)!r}\n")
    return out.getvalue()


def _scatter(points, x0, y0, size):
    pts = np.asarray(points, dtype=float)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    body = []
    for x, y in pts:
        px = x0 + (x - lo[0]) / span * size
        py = y0 + size - (y - lo[1]) / span * size
        body.append(f'<circle cx="{_f(px)}" cy="{_f(py)}" r="0.8" fill="#333"/>')
    return body


def render_points(points, title: str = "attractor") -> str:
    size = WIDTH - 40
    return _svg(WIDTH, WIDTH, _scatter(points, 20, 20, size), title)


def _tiles(sys, hulls, depth, cap=4096):
    """Unmerged depth-``depth`` hull images at node 0, or None past ``cap``."""
    # each piece is x -> scale * x + shift applied to the hull of ``node``
    pieces = [(0, 1, 0)]
    for _ in range(depth):
        pieces = [(e.target, scale * e.rho, scale * e.offset + shift)
                  for node, scale, shift in pieces for e in sys.edges[node]]
        if len(pieces) > cap:
            return None
    out = []
    for node, scale, shift in pieces:
        a, b = hulls[node]
        out.append(tuple(sorted((scale * a + shift, scale * b + shift))))
    return sorted(out)


def render_projection_cover(ifs: Ifs, d: Direction, depth: int, points: int | None = None,
                            seed: int = 0, budget: int = 10**6) -> str:
    """Hull, depth-``depth`` cover and any gap band for one direction."""
    sys = induce_system(ifs, d)
    hulls = solve_hull(sys)
    a, b = (float(x) for x in hulls[0])
    cover = _tiles(sys, hulls, depth) or refine_cover(sys, 0, depth, hulls, budget)
    verdict = decide_interval(sys, 0, max(depth, 1), hulls)
    span = (b - a) or 1.0
    left, right = 30.0, WIDTH - 30.0

    def px(x):
        return left + (float(x) - a) / span * (right - left)

    top = 20.0
    if points:
        pts = attractor_points(ifs, 12, points, seed)
        height = WIDTH + 140
    else:
        pts = None
        height = 160
    body = []
    base = height - 120
    body.append(f'<line x1="{_f(px(a))}" y1="{_f(base)}" x2="{_f(px(b))}" y2="{_f(base)}" '
                'stroke="#000" stroke-width="3"/>')
    body.append(f'<text x="{_f(left)}" y="{_f(base - 8)}" font-family="sans-serif" font-size="11">hull</text>')
    for k, (lo, hi) in enumerate(cover):
        fill = "#6baed6" if k % 2 == 0 else "#9ecae1"
        body.append(f'<rect x="{_f(px(lo))}" y="{_f(base + 14)}" width="{_f(max(px(hi) - px(lo), 0.5))}" '
                    f'height="16" fill="{fill}" stroke="#08519c" stroke-width="0.5"/>')
    body.append(f'<text x="{_f(left)}" y="{_f(base + 46)}" font-family="sans-serif" font-size="11">'
                f'depth {depth} cover: {len(cover)} tile(s)</text>')
    if isinstance(verdict, Gap):
        g = verdict.certificate
        body.append(f'<rect x="{_f(px(g.lo))}" y="{_f(top)}" width="{_f(px(g.hi) - px(g.lo))}" '
                    f'height="{_f(base + 40 - top)}" fill="#fc9272" fill-opacity="0.35" stroke="none"/>')
        body.append(f'<text x="{_f(px(g.lo))}" y="{_f(base + 62)}" font-family="sans-serif" '
                    f'font-size="11">gap at depth {g.depth}</text>')
    if pts is not None:
        body = _scatter(pts, 20, 20, WIDTH - 240) + body
    body.append(f'<text x="{_f(left)}" y="{height - 12}" font-family="sans-serif" font-size="12">'
                f'{escape(ifs.name or "")} direction t={escape(d.label())} verdict={type(verdict).__name__}</text>')
    return _svg(WIDTH, height, body, f"projection cover t={d.label()}")
