"""Planar self-similar iterated function systems.

A map is ``S(x) = r * T x + v`` with ``0 < r < 1``, ``T`` orthogonal and ``v``
a translation.  All entries are either Fractions (exact mode) or floats
(approximate mode); an :class:`Ifs` never mixes the two.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .numeric import (
    FLOAT_TOL,
    all_exact,
    float_up,
    format_scalar,
    is_exact,
    parse_number,
    round_down,
    round_up,
    sqrt_down,
    sqrt_up,
)

IDENTITY = (1, 0, 0, 1)
ROT_TOL = 1e-12


class IfsError(ValueError):
    """Malformed or invalid IFS description."""


class BudgetError(RuntimeError):
    """A computation would exceed its configured size budget."""


def mat_mul(a, b):
    return (
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    )


def mat_vec(a, p):
    return (a[0] * p[0] + a[1] * p[1], a[2] * p[0] + a[3] * p[1])


def mat_t_vec(a, p):
    """``T^t p``."""
    return (a[0] * p[0] + a[2] * p[1], a[1] * p[0] + a[3] * p[1])


def dot(p, q):
    return p[0] * q[0] + p[1] * q[1]


@dataclass(frozen=True)
class Similarity:
    ratio: object
    rot: tuple = IDENTITY  # (a, b, c, d) for [[a, b], [c, d]]
    v: tuple = (0, 0)

    @property
    def det(self):
        a, b, c, d = self.rot
        return a * d - b * c

    @property
    def is_homothety(self) -> bool:
        a, b, c, d = self.rot
        return b == 0 and c == 0 and a == d and (a == 1 or a == -1)

    @property
    def sign(self) -> int:
        """+1 or -1 for homotheties (``T = +-I``)."""
        return 1 if self.rot[0] > 0 else -1

    @property
    def exact(self) -> bool:
        return all_exact((self.ratio, *self.rot, *self.v))

    def __call__(self, p):
        q = mat_vec(self.rot, p)
        return (self.ratio * q[0] + self.v[0], self.ratio * q[1] + self.v[1])

    def compose(self, other: "Similarity") -> "Similarity":
        """``self o other``."""
        tv = mat_vec(self.rot, other.v)
        return Similarity(
            self.ratio * other.ratio,
            mat_mul(self.rot, other.rot),
            (self.ratio * tv[0] + self.v[0], self.ratio * tv[1] + self.v[1]),
        )

    def fixed_point(self):
        # (I - rT) p = v
        a, b, c, d = self.rot
        r = self.ratio
        m00, m01, m10, m11 = 1 - r * a, -r * b, -r * c, 1 - r * d
        det = m00 * m11 - m01 * m10
        x = (m11 * self.v[0] - m01 * self.v[1]) / det
        y = (m00 * self.v[1] - m10 * self.v[0]) / det
        return (x, y)


@dataclass(frozen=True)
class Ifs:
    maps: tuple
    name: str = ""

    def __post_init__(self):
        if len(self.maps) == 0:
            raise IfsError("an IFS needs at least one map")
        object.__setattr__(self, "maps", tuple(self.maps))

    def __len__(self):
        return len(self.maps)

    def __iter__(self):
        return iter(self.maps)

    @property
    def exact(self) -> bool:
        return all(s.exact for s in self.maps)

    @property
    def homothety(self) -> bool:
        return all(s.is_homothety for s in self.maps)

    @property
    def r_max(self):
        return max(s.ratio for s in self.maps)

    @property
    def ratios(self):
        return [s.ratio for s in self.maps]


# --------------------------------------------------------------------------
# parsing / serialization


def _rotation(cos_, sin_, reflect):
    rot = (cos_, -sin_, sin_, cos_)
    if reflect:
        # diag(1, -1) applied after the rotation
        rot = (rot[0], rot[1], -rot[2], -rot[3])
    return rot


def _coerce(x, exact):
    if exact:
        return Fraction(x)
    return float(x)


def ifs_from_dict(doc) -> Ifs:
    if not isinstance(doc, dict):
        raise IfsError("IFS document must be an object")
    maps = doc.get("maps")
    if not isinstance(maps, list) or not maps:
        raise IfsError("field 'maps' must be a non-empty array")
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise IfsError("field 'name' must be a string")
    force_float = doc.get("exact", True) is False

    raw = []
    for k, m in enumerate(maps):
        if not isinstance(m, dict):
            raise IfsError(f"map {k}: must be an object")
        unknown = set(m) - {"r", "v", "cos", "sin", "reflect", "rotation_deg"}
        if unknown:
            raise IfsError(f"map {k}: unknown fields {sorted(unknown)}")
        try:
            r = parse_number(m["r"])
            v = m.get("v", ["0", "0"])
            if not isinstance(v, list) or len(v) != 2:
                raise IfsError(f"map {k}: 'v' must be an array of two numbers")
            v = tuple(parse_number(x) for x in v)
            reflect = m.get("reflect", False)
            if not isinstance(reflect, bool):
                raise IfsError(f"map {k}: 'reflect' must be a boolean")
            if "rotation_deg" in m:
                if "cos" in m or "sin" in m:
                    raise IfsError(f"map {k}: give either cos/sin or rotation_deg")
                ang = math.radians(float(parse_number(m["rotation_deg"])))
                cs, approx = (math.cos(ang), math.sin(ang)), True
            elif "cos" in m or "sin" in m:
                if "cos" not in m or "sin" not in m:
                    raise IfsError(f"map {k}: cos and sin must be given together")
                cs, approx = (parse_number(m["cos"]), parse_number(m["sin"])), False
            else:
                cs, approx = (Fraction(1), Fraction(0)), False
        except KeyError as exc:
            raise IfsError(f"map {k}: missing field {exc}") from None
        except ValueError as exc:
            if isinstance(exc, IfsError):
                raise
            raise IfsError(f"map {k}: {exc}") from None
        if not 0 < r < 1:
            raise IfsError(f"map {k}: ratio {m['r']!r} outside (0, 1)")
        norm = cs[0] * cs[0] + cs[1] * cs[1]
        if all_exact(cs) and norm != 1:
            if abs(float(norm) - 1) > ROT_TOL:
                raise IfsError(f"map {k}: cos^2 + sin^2 != 1")
            approx = True
        elif abs(float(norm) - 1) > ROT_TOL:
            raise IfsError(f"map {k}: cos^2 + sin^2 != 1")
        raw.append((r, v, cs, reflect, approx))

    exact = not force_float and all(
        not approx and all_exact((r, *v, *cs)) for r, v, cs, _, approx in raw
    )
    sims = []
    for r, v, cs, reflect, _ in raw:
        cs = tuple(_coerce(x, exact) for x in cs)
        sims.append(
            Similarity(
                _coerce(r, exact),
                _rotation(cs[0], cs[1], reflect),
                tuple(_coerce(x, exact) for x in v),
            )
        )
    return Ifs(tuple(sims), name)


def parse_ifs(text: str) -> Ifs:
    """Parse a JSON IFS document (see README for the schema)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IfsError(f"malformed document: {exc}") from None
    return ifs_from_dict(doc)


def _num_out(x, exact):
    return format_scalar(x) if exact else float(x)


def ifs_to_dict(ifs: Ifs) -> dict:
    exact = ifs.exact
    maps = []
    for s in ifs.maps:
        a, b, c, d = s.rot
        entry = {"r": _num_out(s.ratio, exact), "v": [_num_out(x, exact) for x in s.v]}
        if s.rot != IDENTITY or not exact:
            reflect = (a * d - b * c) < 0
            cos_, sin_ = (a, -c) if reflect else (a, c)
            if (cos_, sin_) != (1, 0) or reflect:
                entry["cos"] = _num_out(cos_, exact)
                entry["sin"] = _num_out(sin_, exact)
            if reflect:
                entry["reflect"] = True
        maps.append(entry)
    doc = {"name": ifs.name, "maps": maps}
    if not exact:
        doc["exact"] = False
    return doc


def serialize_ifs(ifs: Ifs) -> str:
    return json.dumps(ifs_to_dict(ifs), indent=2) + "\n"


# --------------------------------------------------------------------------
# dimension and rotation group


def similarity_dimension(ifs: Ifs, tol: float = 1e-12):
    """Solve ``sum r_i^s = 1`` for ``s``.

    Returns exactly 1 when the ratios sum to one; otherwise bisects.
    """
    ratios = ifs.ratios
    if sum(ratios) == 1:
        return Fraction(1) if ifs.exact else 1.0
    if len(ratios) == 1:
        return Fraction(0) if ifs.exact else 0.0
    rf = [float(r) for r in ratios]
    lo, hi = 0.0, math.log(len(rf)) / math.log(1 / max(rf)) + 1
    for _ in range(200):
        mid = (lo + hi) / 2
        val = sum(r**mid for r in rf) - 1
        if abs(val) <= tol or hi - lo < 1e-16:
            return mid
        if val > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


@dataclass(frozen=True)
class FiniteGroup:
    elements: tuple

    @property
    def order(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class ExceedsCap:
    cap: int


def _mat_key(m, exact):
    if exact:
        return m
    return tuple(round(float(x), 8) + 0.0 for x in m)


def rotation_group(ifs: Ifs, cap: int = 1000):
    """Breadth-first closure of the orthogonal parts under composition."""
    exact = ifs.exact
    one = (1, 0, 0, 1) if exact else (1.0, 0.0, 0.0, 1.0)
    gens = []
    seen_gen = set()
    for s in ifs.maps:
        key = _mat_key(s.rot, exact)
        if key not in seen_gen:
            seen_gen.add(key)
            gens.append(s.rot)
    elements = [one]
    seen = {_mat_key(one, exact)}
    frontier = [one]
    while frontier:
        nxt = []
        for e in frontier:
            for g in gens:
                p = mat_mul(g, e)
                key = _mat_key(p, exact)
                if key in seen:
                    continue
                seen.add(key)
                elements.append(p)
                nxt.append(p)
                if len(elements) > cap:
                    return ExceedsCap(cap)
        frontier = nxt
    return FiniteGroup(tuple(elements))


# --------------------------------------------------------------------------
# support function and cylinder covers


def crude_radius(ifs: Ifs) -> float:
    """Radius of a ball around the origin that contains the attractor."""
    vmax = max(math.hypot(float(s.v[0]), float(s.v[1])) for s in ifs.maps)
    return round_up(vmax / (1 - float(ifs.r_max)))


def _support_branch_and_bound(ifs: Ifs, u, tol=1e-12, max_words=20000):
    uf = (float(u[0]), float(u[1]))
    unorm = math.hypot(*uf)
    rho = crude_radius(ifs)
    p0 = tuple(float(x) for x in ifs.maps[0].fixed_point())
    fmaps = [
        Similarity(float(s.ratio), tuple(float(x) for x in s.rot), tuple(float(x) for x in s.v))
        for s in ifs.maps
    ]
    words = [Similarity(1.0, (1.0, 0.0, 0.0, 1.0), (0.0, 0.0))]
    best_lower = dot(uf, p0)
    upper = dot(uf, p0) + unorm * rho * 2
    for _ in range(200):
        nxt = []
        uppers = []
        for w in words:
            for s in fmaps:
                c = w.compose(s)
                ub = dot(uf, c.v) + unorm * c.ratio * rho
                lb = dot(uf, c(p0))
                best_lower = max(best_lower, lb)
                nxt.append((ub, c))
        nxt = [(ub, c) for ub, c in nxt if ub >= best_lower]
        uppers = [ub for ub, _ in nxt]
        upper = max(uppers)
        if upper - best_lower <= tol * max(1.0, abs(upper)) or len(nxt) > max_words:
            break
        nxt.sort(key=lambda item: -item[0])
        words = [c for _, c in nxt[:max_words]]
    return round_up(upper + 1e-15 * max(1.0, abs(upper)))


def support_bound(ifs: Ifs, u):
    """Upper bound for ``h_K(u) = max_{x in K} u.x``.

    Exact whenever the rotation group is finite and the data exact (the
    support values along the orbit of ``u`` solve a finite min/max system);
    otherwise an outward-rounded branch-and-bound over cylinder balls.
    """
    from .projection import induce_system, solve_hull

    group = rotation_group(ifs, cap=64)
    if isinstance(group, FiniteGroup):
        sys = induce_system(ifs, tuple(u), group)
        hull = solve_hull(sys)
        b = hull[0][1]
        return b if is_exact(b) else round_up(b + 1e-13 * max(1.0, abs(b)))
    return _support_branch_and_bound(ifs, u)


def bounding_box(ifs: Ifs):
    """(xmin, xmax, ymin, ymax) certified to contain the attractor."""
    one = 1 if ifs.exact else 1.0
    xmax = support_bound(ifs, (one, 0 * one))
    xmin = -support_bound(ifs, (-one, 0 * one))
    ymax = support_bound(ifs, (0 * one, one))
    ymin = -support_bound(ifs, (0 * one, -one))
    return xmin, xmax, ymin, ymax


def attractor_ball(ifs: Ifs):
    """Center and radius bound ``R0`` from the bounding square."""
    xmin, xmax, ymin, ymax = bounding_box(ifs)
    center = ((xmin + xmax) / 2, (ymin + ymax) / 2)
    half_sq = ((xmax - xmin) ** 2 + (ymax - ymin) ** 2) / 4
    r0 = sqrt_up(half_sq)
    if ifs.exact:
        r0 = Fraction(r0)
        center = tuple(Fraction(c) for c in center)
    return center, r0


@dataclass(frozen=True)
class CylinderBox:
    word: tuple
    center: tuple
    radius: object


def iter_words(m: int, depth: int):
    return itertools.product(range(m), repeat=depth)


def word_map(ifs: Ifs, word) -> Similarity:
    one = 1 if ifs.exact else 1.0
    s = Similarity(one, (one, 0 * one, 0 * one, one), (0 * one, 0 * one))
    for i in word:
        s = s.compose(ifs.maps[i])
    return s


def cylinder_cover(ifs: Ifs, depth: int, budget: int = 10**6, ball=None):
    """One certified ball per word of length ``depth``, ordered by word."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    m = len(ifs)
    if depth * m**depth > budget:
        raise BudgetError(f"cylinder cover of depth {depth} exceeds budget {budget}")
    center, r0 = ball if ball is not None else attractor_ball(ifs)
    boxes = []
    maps = [(i,) for i in range(m)]
    level = [((), word_map(ifs, ()))]
    for _ in range(depth):
        level = [(w + idx, s.compose(ifs.maps[idx[0]])) for w, s in level for idx in maps]
    for w, s in level:
        boxes.append(CylinderBox(w, s(center), s.ratio * r0))
    return boxes


# --------------------------------------------------------------------------
# strong separation


@dataclass(frozen=True)
class Separated:
    min_gap: float
    depth: int


@dataclass(frozen=True)
class NotSeparated:
    pair: tuple
    point: tuple


@dataclass(frozen=True)
class SscUndecided:
    depth: int


def _common_point(ifs: Ifs, depth: int):
    """Exhibit a point shared by two first-level cylinders (exact mode)."""
    fixed = [s.fixed_point() for s in ifs.maps]
    tails = [word_map(ifs, w) for k in range(depth) for w in iter_words(len(ifs), k)]
    samples = {}
    for i, s in enumerate(ifs.maps):
        pts = set()
        for t in tails:
            st = s.compose(t)
            for p in fixed:
                pts.add(st(p))
        samples[i] = pts
    for i, j in itertools.combinations(range(len(ifs)), 2):
        common = samples[i] & samples[j]
        if common:
            return (i, j), min(common)
    return None


def certify_ssc(ifs: Ifs, max_depth: int = 6, max_boxes: int = 4096):
    """Separated / NotSeparated / SscUndecided from cylinder-ball distances."""
    m = len(ifs)
    if m == 1:
        return Separated(math.inf, 0)
    ball = attractor_ball(ifs)
    for k in range(1, max_depth + 1):
        if ifs.exact and m ** (k - 1) * m <= 256:
            hit = _common_point(ifs, k)
            if hit is not None:
                return NotSeparated(*hit)
        if m**k > max_boxes:
            return SscUndecided(k - 1)
        boxes = cylinder_cover(ifs, k, budget=10**9, ball=ball)
        centers = np.array([[float(b.center[0]), float(b.center[1])] for b in boxes])
        radii = np.array([float_up(b.radius) for b in boxes])
        first = np.array([b.word[0] for b in boxes])
        diff = centers[:, None, :] - centers[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=2))
        gap = dist * (1 - 1e-12) - (radii[:, None] + radii[None, :]) * (1 + 1e-12) - 1e-15
        mask = first[:, None] != first[None, :]
        min_gap = float(gap[mask].min())
        if min_gap > 0:
            return Separated(round_down(min_gap), k)
    return SscUndecided(max_depth)


# --------------------------------------------------------------------------
# collinearity


@dataclass(frozen=True)
class NotCollinear:
    points: tuple


@dataclass(frozen=True)
class Collinear:
    point: tuple
    direction: tuple


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def detect_collinear(ifs: Ifs):
    """Decide whether the attractor lies on a line.

    Tests the fixed points of all words of length <= 2 together with the
    images ``S_i(p_j)`` of the first-level fixed points.  If these are
    collinear and two of them differ, every ``S_i`` maps the line through
    them into itself, so the line is invariant and contains the attractor.
    """
    fixed = [s.fixed_point() for s in ifs.maps]
    pts = list(fixed)
    for s in ifs.maps:
        pts.extend(s(p) for p in fixed)
        pts.extend(s.compose(t).fixed_point() for t in ifs.maps)
    exact = ifs.exact
    scale = max(1.0, max(abs(float(c)) for p in pts for c in p))

    def same(p, q):
        if exact:
            return p == q
        return math.hypot(float(p[0] - q[0]), float(p[1] - q[1])) <= FLOAT_TOL * scale

    base = pts[0]
    other = next((q for q in pts if not same(base, q)), None)
    if other is None:
        one = 1 if exact else 1.0
        return Collinear(base, (one, 0 * one))
    span = math.hypot(float(other[0] - base[0]), float(other[1] - base[1]))
    for q in pts:
        c = _cross(base, other, q)
        off = (c == 0) if exact else abs(float(c)) <= FLOAT_TOL * scale * span
        if not off:
            return NotCollinear((base, other, q))
    return Collinear(base, (other[0] - base[0], other[1] - base[1]))
