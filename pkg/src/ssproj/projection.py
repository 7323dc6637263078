"""Induced one-dimensional systems and the interval/gap decision.

Projecting ``S_i(x) = r T x + v`` with a linear functional ``w`` gives
``w.S_i(x) = r (T^t w).x + w.v``.  The functionals reachable from the root
under ``w -> T_i^t w`` (taken up to sign) are the nodes of a graph-directed
system of affine contractions on the line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .ifs import ExceedsCap, FiniteGroup, Ifs, dot, mat_t_vec, rotation_group
from .numeric import (
    FLOAT_TOL,
    all_exact,
    float_down,
    is_exact,
    rational_near,
    round_down,
    solve_linear,
)


class InfiniteGroupError(ValueError):
    """The rotation group is infinite; no finite induced system exists."""


# --------------------------------------------------------------------------
# directions


@dataclass(frozen=True)
class Direction:
    """Line through the origin.

    ``t`` is the slope (functional ``x + t*y``); ``t is None`` means the
    vertical line (functional ``y``).
    """

    t: object = None

    @property
    def vertical(self) -> bool:
        return self.t is None

    @property
    def functional(self):
        if self.t is None:
            return (0, 1)
        one = 1 if is_exact(self.t) else 1.0
        return (one, self.t)

    @property
    def perpendicular(self):
        if self.t is None:
            return (1, 0)
        one = 1 if is_exact(self.t) else 1.0
        return (-self.t, one)

    @property
    def norm_sq(self):
        if self.t is None:
            return 1
        return 1 + self.t * self.t

    @property
    def norm(self) -> float:
        return math.sqrt(float(self.norm_sq))

    @property
    def angle(self) -> float:
        """Angle in [0, pi) of the line."""
        if self.t is None:
            return math.pi / 2
        a = math.atan(float(self.t))
        return a + math.pi if a < 0 else a

    @property
    def orientation(self) -> int:
        """Sign relating ``x + t*y`` to the unit projection at ``angle``."""
        if self.t is None:
            return 1
        return 1 if self.t >= 0 else -1

    @property
    def exact(self) -> bool:
        return self.t is None or is_exact(self.t)

    def normalize(self, x) -> float:
        """Map a functional value to the coordinate on the unit line."""
        return self.orientation * float(x) / self.norm

    def label(self) -> str:
        if self.t is None:
            return "vertical"
        from .numeric import format_scalar

        return format_scalar(self.t)

    @classmethod
    def from_angle(cls, theta: float, max_denominator: int | None = None) -> "Direction":
        """Direction at angle ``theta``.

        With ``max_denominator`` the slope (or its reciprocal near the
        vertical) is snapped to a nearby rational; otherwise the slope is
        the exact rational value of the float ``tan(theta)`` (or a float
        when ``max_denominator`` is 0).
        """
        theta = theta % math.pi
        if theta == math.pi / 2:
            return cls(None)
        if max_denominator == 0:
            return cls(math.tan(theta))
        c, s = math.cos(theta), math.sin(theta)
        if abs(s) <= abs(c):
            t = s / c
            return cls(rational_near(t, max_denominator) if max_denominator else Fraction(t))
        cot = c / s
        q = rational_near(cot, max_denominator) if max_denominator else Fraction(cot)
        if q == 0:
            return cls(None)
        return cls(1 / q)


def Slope(t) -> Direction:
    if isinstance(t, (int, str)):
        t = Fraction(t)
    return Direction(t)


VERTICAL = Direction(None)


# --------------------------------------------------------------------------
# induced systems


@dataclass(frozen=True)
class Edge:
    target: int
    rho: object
    offset: object
    map_index: int


@dataclass(frozen=True)
class Projected1DSystem:
    nodes: tuple  # functional vectors, nodes[0] is the root
    edges: tuple  # per node, tuple of Edge
    exact: bool
    direction: Direction | None = None

    @property
    def single_node(self) -> bool:
        return len(self.nodes) == 1


def _canonical(w, exact):
    """Return (sign, w') with w = sign * w' and w' normalised in sign."""
    if exact:
        lead = w[0] if w[0] != 0 else w[1]
    else:
        scale = max(abs(float(w[0])), abs(float(w[1])))
        lead = w[0] if abs(float(w[0])) > 1e-9 * scale else w[1]
    if lead < 0:
        return -1, (-w[0], -w[1])
    return 1, (w[0], w[1])


def _find_node(nodes, w, exact):
    """Index and sign with ``w = sign * nodes[index]``, or (None, 1)."""
    if exact:
        for k, n in enumerate(nodes):
            if n == w:
                return k, 1
            if n[0] == -w[0] and n[1] == -w[1]:
                return k, -1
        return None, 1
    scale = max(1.0, abs(float(w[0])), abs(float(w[1])))
    for k, n in enumerate(nodes):
        for sign in (1, -1):
            if (abs(sign * float(n[0]) - float(w[0])) <= 1e-9 * scale
                    and abs(sign * float(n[1]) - float(w[1])) <= 1e-9 * scale):
                return k, sign
    return None, 1


def induce_system(ifs: Ifs, d, group=None) -> Projected1DSystem:
    """Build the graph-directed 1-D system for a Direction or functional."""
    if group is None:
        group = rotation_group(ifs)
    if isinstance(group, ExceedsCap):
        raise InfiniteGroupError("rotation group exceeds cap; projections have measure zero")
    direction = d if isinstance(d, Direction) else None
    w0 = d.functional if isinstance(d, Direction) else tuple(d)
    exact = ifs.exact and all_exact(w0)
    if not exact:
        w0 = (float(w0[0]), float(w0[1]))
    nodes = [w0]
    edges = []
    k = 0
    while k < len(nodes):
        w = nodes[k]
        out = []
        for i, s in enumerate(ifs.maps):
            z = mat_t_vec(s.rot, w)
            j, sign = _find_node(nodes, z, exact)
            if j is None:
                sign, zc = _canonical(z, exact)
                nodes.append(zc)
                j = len(nodes) - 1
                if len(nodes) > group.order:
                    raise InfiniteGroupError("orbit larger than the rotation group")
            out.append(Edge(j, sign * s.ratio, dot(w, s.v), i))
        edges.append(tuple(out))
        k += 1
    return Projected1DSystem(tuple(nodes), tuple(edges), exact, direction)


# --------------------------------------------------------------------------
# hulls


def solve_hull(sys: Projected1DSystem):
    """Exact fixed point of the endpoint recursion, one ``(a, b)`` per node.

    Writes ``z = (a_n, -b_n)``, which satisfies ``z = min_policy (P z + c)``
    with ``P`` nonnegative and row sums < 1, and runs policy iteration.  Each
    step solves a linear system (exact for Fractions) and the loop stops
    when no state can be improved, i.e. the fixed point is verified.
    """
    n = len(sys.nodes)
    # actions[s] = list of (succ_state, coef, const)
    actions = []
    for node_edges in sys.edges:
        act_a, act_b = [], []
        for e in node_edges:
            if e.rho > 0:
                act_a.append((2 * e.target, e.rho, e.offset))
                act_b.append((2 * e.target + 1, e.rho, -e.offset))
            else:
                act_a.append((2 * e.target + 1, -e.rho, e.offset))
                act_b.append((2 * e.target, -e.rho, -e.offset))
        actions.extend([act_a, act_b])
    size = 2 * n
    # start from the action with the smallest fixed value if followed alone
    policy = [min(range(len(acts)), key=lambda k: float(acts[k][2]) / (1 - float(acts[k][1])))
              for acts in actions]
    exact = sys.exact
    for _ in range(10 * size + 50):
        a = [[0] * size for _ in range(size)]
        b = [0] * size
        for s in range(size):
            succ, coef, const = actions[s][policy[s]]
            a[s][s] += 1
            a[s][succ] -= coef
            b[s] = const
        z = solve_linear(a, b)
        changed = False
        for s in range(size):
            cur = z[s]
            scale = max(1.0, abs(float(cur)))
            best_k, best_v = policy[s], cur
            for k, (succ, coef, const) in enumerate(actions[s]):
                val = coef * z[succ] + const
                better = val < best_v if exact else float(val) < float(best_v) - 1e-13 * scale
                if better:
                    best_k, best_v = k, val
            if best_k != policy[s]:
                policy[s] = best_k
                changed = True
        if not changed:
            return [(z[2 * k], -z[2 * k + 1]) for k in range(n)]
    raise RuntimeError("policy iteration did not converge")


# --------------------------------------------------------------------------
# covers


def _image(e: Edge, lo, hi):
    x, y = e.rho * lo + e.offset, e.rho * hi + e.offset
    return (x, y) if e.rho > 0 else (y, x)


def merge_intervals(intervals, tol=0):
    """Sort and merge closed intervals that overlap or touch (within tol)."""
    out = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1] + tol:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return out


def _tol(sys, hulls):
    if sys.exact:
        return 0
    scale = max(1.0, max(max(abs(float(a)), abs(float(b))) for a, b in hulls))
    return FLOAT_TOL * scale


def _refine_once(sys, covers, tol):
    new = []
    for node_edges in sys.edges:
        pieces = [_image(e, lo, hi) for e in node_edges for lo, hi in covers[e.target]]
        new.append(merge_intervals(pieces, tol))
    return new


def _covers_by_level(sys, hulls, depth, budget):
    from .ifs import BudgetError

    tol = _tol(sys, hulls)
    covers = [[h] for h in hulls]
    levels = [covers]
    for _ in range(depth):
        covers = _refine_once(sys, covers, tol)
        if sum(len(c) for c in covers) > budget:
            raise BudgetError(f"cover refinement exceeds budget {budget}")
        levels.append(covers)
    return levels


def refine_cover(sys: Projected1DSystem, node: int = 0, depth: int = 1, hulls=None, budget: int = 10**6):
    """Merged depth-``depth`` hull-image intervals at ``node``."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if hulls is None:
        hulls = solve_hull(sys)
    return _covers_by_level(sys, hulls, depth, budget)[depth][node]


# --------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class Interval:
    lo: object
    hi: object
    exact: bool
    direction: Direction | None = None

    @property
    def exactness(self) -> str:
        return "exact" if self.exact else "certified-float"

    @property
    def length_sq(self):
        """Squared length on the unit line (exact for rational data)."""
        norm_sq = self.direction.norm_sq if self.direction else 1
        return (self.hi - self.lo) ** 2 / norm_sq

    @property
    def length(self) -> float:
        return math.sqrt(float(self.length_sq))

    def normalized(self):
        if self.direction is None:
            return float(self.lo), float(self.hi)
        ends = sorted((self.direction.normalize(self.lo), self.direction.normalize(self.hi)))
        return ends[0], ends[1]


@dataclass(frozen=True)
class GapCertificate:
    """Open interval ``(lo, hi)`` inside the node hull missing the projection.

    ``lo``/``hi`` are functional values (unnormalized); ``center`` and
    ``half_width`` are on the unit line.
    """

    node: int
    lo: object
    hi: object
    depth: int
    hull: tuple
    direction: Direction | None = None

    @property
    def half_width(self) -> float:
        norm = self.direction.norm if self.direction else 1.0
        return round_down(float_down((self.hi - self.lo) / 2) / norm)

    @property
    def center(self) -> float:
        mid = (self.lo + self.hi) / 2
        return self.direction.normalize(mid) if self.direction else float(mid)


@dataclass(frozen=True)
class Gap:
    certificate: GapCertificate


@dataclass(frozen=True)
class Undecided:
    depth: int


def _largest_gap(cover):
    best = None
    for (_, h0), (l1, _) in zip(cover, cover[1:]):
        if best is None or l1 - h0 > best[1] - best[0]:
            best = (h0, l1)
    return best


def decide_interval(sys: Projected1DSystem, node: int = 0, max_depth: int = 12, hulls=None,
                    budget: int = 200000):
    """Interval, Gap or Undecided for the projection at ``node``.

    Interval needs the depth-1 images to cover the hull at every node.
    Otherwise covers at ``node`` are refined until a gap appears.
    """
    if hulls is None:
        hulls = solve_hull(sys)
    a, b = hulls[node]
    direction = sys.direction if node == 0 else None
    tol = _tol(sys, hulls)
    if a == b or (not sys.exact and b - a <= tol):
        return Interval(a, b, sys.exact, direction)
    covers = _refine_once(sys, [[h] for h in hulls], tol)
    if all(len(c) == 1 for c in covers):
        return Interval(a, b, sys.exact, direction)
    depth = 1
    while True:
        cover = covers[node]
        if len(cover) > 1:
            lo, hi = _largest_gap(cover)
            if not sys.exact:
                err = 1e-12 * max(1.0, abs(float(a)), abs(float(b)))
                lo, hi = lo + err, hi - err
            return Gap(GapCertificate(node, lo, hi, depth, (a, b), direction))
        if depth >= max_depth:
            return Undecided(depth)
        covers = _refine_once(sys, covers, tol)
        if sum(len(c) for c in covers) > budget:
            return Undecided(depth)
        depth += 1
