"""Convex polygon witnesses for interval projections.

A convex polygon ``F`` with ``S_i(F) subset F`` certifies a direction when
every line across that direction meeting ``F`` also meets one of the images
``S_i(F)``; it certifies *every* direction when this holds for all lines.
Both reduce to covering the projection of ``F`` by the projections of the
images.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .ifs import Ifs
from .numeric import FLOAT_TOL, all_exact, format_scalar, parse_number
from .projection import Direction, merge_intervals


class WitnessError(ValueError):
    pass


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class ConvexPolygon:
    vertices: tuple

    def __post_init__(self):
        verts = tuple(tuple(v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        n = len(verts)
        if n < 3:
            raise WitnessError("a polygon needs at least three vertices")
        scale = max(1.0, max(abs(float(c)) for v in verts for c in v))
        for k in range(n):
            c = _cross(verts[k], verts[(k + 1) % n], verts[(k + 2) % n])
            ok = c > 0 if self.exact else float(c) > FLOAT_TOL * scale * scale
            if not ok:
                raise WitnessError("vertices must be strictly convex and counterclockwise")

    @property
    def exact(self) -> bool:
        return all_exact(c for v in self.vertices for c in v)

    def contains(self, p, tol: float = 0.0) -> bool:
        n = len(self.vertices)
        for k in range(n):
            c = _cross(self.vertices[k], self.vertices[(k + 1) % n], p)
            if c < -tol:
                return False
        return True

    def project(self, w):
        vals = [w[0] * x + w[1] * y for x, y in self.vertices]
        return min(vals), max(vals)

    def image(self, s) -> "ConvexPolygon":
        verts = [s(v) for v in self.vertices]
        if s.det < 0:
            verts.reverse()
        return ConvexPolygon(tuple(verts))


def parse_polygon(text: str) -> ConvexPolygon:
    try:
        doc = json.loads(text)
        verts = tuple(tuple(parse_number(c) for c in v) for v in doc["vertices"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise WitnessError(f"malformed polygon document: {exc}") from None
    if any(len(v) != 2 for v in verts):
        raise WitnessError("each vertex needs two coordinates")
    if not all_exact(c for v in verts for c in v):
        verts = tuple(tuple(float(c) for c in v) for v in verts)
    return ConvexPolygon(verts)


def polygon_to_dict(poly: ConvexPolygon) -> dict:
    return {"vertices": [[format_scalar(c) if poly.exact else float(c) for c in v] for v in poly.vertices]}


def _tol(poly):
    if poly.exact:
        return 0
    return FLOAT_TOL * max(1.0, max(abs(float(c)) for v in poly.vertices for c in v))


def check_invariance(poly: ConvexPolygon, ifs: Ifs) -> bool:
    """True iff every image vertex of every map lies in ``poly``."""
    tol = _tol(poly) if poly.exact and ifs.exact else FLOAT_TOL * 10
    return all(poly.contains(s(v), tol) for s in ifs.maps for v in poly.vertices)


def _uncovered(target, pieces, tol):
    """Largest open piece of ``target`` missed by the union of ``pieces``."""
    lo, hi = target
    merged = merge_intervals(pieces, tol)
    best, cursor = None, lo
    for a, b in merged:
        if a > cursor + tol and cursor < hi:
            cand = (cursor, min(a, hi))
            if best is None or cand[1] - cand[0] > best[1] - best[0]:
                best = cand
        cursor = max(cursor, b)
        if cursor >= hi:
            break
    if cursor < hi - tol:
        cand = (cursor, hi)
        if best is None or cand[1] - cand[0] > best[1] - best[0]:
            best = cand
    return best


def check_theta_witness(poly: ConvexPolygon, ifs: Ifs, d: Direction) -> bool:
    """Whether ``poly`` witnesses an interval projection onto ``d``."""
    if not ifs.homothety:
        raise WitnessError("a direction witness needs an all-homothety system")
    if not check_invariance(poly, ifs):
        raise WitnessError("polygon is not mapped into itself")
    w = d.functional
    tol = 0 if (poly.exact and ifs.exact and d.exact) else FLOAT_TOL * 10
    images = [poly.image(s).project(w) for s in ifs.maps]
    return _uncovered(poly.project(w), images, tol) is None


@dataclass(frozen=True)
class WitnessCertified:
    normals_checked: int


@dataclass(frozen=True)
class CounterexampleLine:
    """The line ``{p : normal . p = level}``: meets ``F``, misses every image."""

    normal: tuple
    level: object

    def verify(self, poly: ConvexPolygon, ifs: Ifs) -> bool:
        lo, hi = poly.project(self.normal)
        if not lo <= self.level <= hi:
            return False
        for s in ifs.maps:
            a, b = poly.image(s).project(self.normal)
            if a <= self.level <= b:
                return False
        return True


def _critical_normals(points, exact):
    """Normals perpendicular to every vertex difference, sorted by angle."""
    normals = []
    for k, p in enumerate(points):
        for q in points[k + 1:]:
            u = (q[1] - p[1], p[0] - q[0])
            if u == (0, 0) or (not exact and math.hypot(float(u[0]), float(u[1])) <= FLOAT_TOL):
                continue
            if u[1] < 0 or (u[1] == 0 and u[0] < 0):
                u = (-u[0], -u[1])
            normals.append(u)
    normals.sort(key=lambda u: math.atan2(float(u[1]), float(u[0])))
    out = []
    for u in normals:
        if out:
            c = out[-1][0] * u[1] - out[-1][1] * u[0]
            same = c == 0 if exact else abs(float(c)) <= FLOAT_TOL * math.hypot(*map(float, u)) * math.hypot(*map(float, out[-1]))
            if same:
                continue
        out.append(u)
    return out


def _between(u, v, exact):
    """A normal strictly inside the angle from ``u`` to ``v`` (less than pi)."""
    nu, nv = math.hypot(float(u[0]), float(u[1])), math.hypot(float(v[0]), float(v[1]))
    if exact:
        a, b = Fraction(nv).limit_denominator(10**6), Fraction(nu).limit_denominator(10**6)
    else:
        a, b = nv, nu
    return (a * u[0] + b * v[0], a * u[1] + b * v[1])


def check_every_line_witness(poly: ConvexPolygon, ifs: Ifs, angle_tol: float = 1e-12):
    """Decide whether every line meeting ``poly`` meets some image polygon.

    The covering test at a normal ``u`` depends only on the order of the
    projected vertices of ``poly`` and of its images.  That order changes
    only where ``u`` is perpendicular to a vertex difference, so testing every
    such critical normal and one normal inside each arc between consecutive
    critical normals decides all lines.  With rational data every test is
    exact; ``angle_tol`` only matters for float data.
    """
    if not check_invariance(poly, ifs):
        raise WitnessError("polygon is not mapped into itself")
    images = [poly.image(s) for s in ifs.maps]
    exact = poly.exact and ifs.exact
    tol = 0 if exact else max(FLOAT_TOL * 10, angle_tol)
    points = list(poly.vertices) + [v for im in images for v in im.vertices]
    crit = _critical_normals(points, exact)
    tests = list(crit)
    for k, u in enumerate(crit):
        v = crit[k + 1] if k + 1 < len(crit) else (-crit[0][0], -crit[0][1])
        tests.append(_between(u, v, exact))
    for w in tests:
        gap = _uncovered(poly.project(w), [im.project(w) for im in images], tol)
        if gap is not None:
            return CounterexampleLine(w, (gap[0] + gap[1]) / 2)
    return WitnessCertified(len(tests))


def witness_report(result) -> dict:
    if isinstance(result, WitnessCertified):
        return {"verdict": "certified", "evidence": {"normals_checked": result.normals_checked}}
    if isinstance(result, CounterexampleLine):
        return {
            "verdict": "counterexample",
            "evidence": {"normal": [format_scalar(c) for c in result.normal], "level": format_scalar(result.level)},
        }
    if isinstance(result, bool):
        return {"verdict": "witness" if result else "not-a-witness", "evidence": {}}
    raise TypeError(f"unexpected witness result {result!r}")
