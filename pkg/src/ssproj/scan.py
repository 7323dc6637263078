"""Certified enumeration of the interval projections of an IFS attractor.

Angle space [0, pi) is covered by three kinds of evidence:

* certified directions, where the projection is an interval;
* excluded arcs, each carried by a gap certificate at a sample direction and
  the separating-line radius ``delta = atan(2r / H)``;
* undecided arcs, whose total measure is the reported residue.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .ifs import (
    Collinear,
    ExceedsCap,
    Ifs,
    detect_collinear,
    rotation_group,
)
from .numeric import (
    FLOAT_TOL,
    float_down,
    format_scalar,
    is_exact,
    round_down,
    round_up,
    solve_linear,
)
from .projection import (
    VERTICAL,
    Direction,
    Gap,
    GapCertificate,
    Interval,
    Undecided,
    decide_interval,
    induce_system,
    solve_hull,
)

CAVEAT = (
    "Directions inside undecided arcs are not classified; a residue below the "
    "target does not prove that no interval direction hides there."
)


# --------------------------------------------------------------------------
# single directions


def verify_direction(ifs: Ifs, d: Direction, max_depth: int = 12, group=None):
    """Full pipeline for one direction; endpoints via ``Interval.normalized``."""
    sys = induce_system(ifs, d, group)
    return decide_interval(sys, 0, max_depth)


def perpendicular_extent(ifs: Ifs, d: Direction, group=None):
    """Width of the attractor across ``d``, in the units of ``d.functional``.

    ``d.perpendicular`` has the same norm as ``d.functional``, so the value is
    directly comparable with gap widths measured by ``x + t*y``.
    """
    sys = induce_system(ifs, d.perpendicular, group)
    a, b = solve_hull(sys)[0]
    h = b - a
    if is_exact(h):
        return h
    return round_up(h + 1e-12 * max(1.0, abs(a), abs(b)))


@dataclass(frozen=True)
class ExclusionCertificate:
    theta: float
    delta: float
    gap: GapCertificate
    extent: object

    @property
    def lo(self) -> float:
        return self.theta - self.delta

    @property
    def hi(self) -> float:
        return self.theta + self.delta


def exclusion_radius(gap: GapCertificate, extent, theta: float | None = None) -> ExclusionCertificate:
    """Angular radius around a gapped direction free of interval projections.

    A line through the middle of the gap, at mid-height of the attractor,
    tilted by less than ``atan(2r/H)`` stays inside the gap slab across the
    whole extent ``H`` and separates the attractor.  ``extent`` is measured
    in the same units as the gap endpoints.
    """
    if extent <= 0:
        raise ValueError("extent must be positive (collinear attractors are handled separately)")
    ratio = (gap.hi - gap.lo) / extent
    delta = round_down(math.atan(float_down(ratio)), 8)
    if theta is None:
        theta = gap.direction.angle if gap.direction is not None else 0.0
    # the sample angle itself is a rounded float
    delta = max(0.0, delta - 4 * math.ulp(max(theta, 1.0)))
    return ExclusionCertificate(theta, delta, gap, extent)


# --------------------------------------------------------------------------
# candidate slopes for homothety systems


def _lin_key(f, exact):
    return f if exact else (round(float(f[0]), 12) + 0.0, round(float(f[1]), 12) + 0.0)


def _hull_candidates(ifs: Ifs):
    """Linear functions ``c0 + c1*t`` among which the hull endpoints lie."""
    rhos = [s.sign * s.ratio for s in ifs.maps]
    offs = [(s.v[0], s.v[1]) for s in ifs.maps]
    if all(r > 0 for r in rhos):
        fs = [(o[0] / (1 - r), o[1] / (1 - r)) for r, o in zip(rhos, offs)]
        return fs, fs
    lows, highs = [], []
    n = len(rhos)
    for i in range(n):
        for j in range(n):
            ri, rj = rhos[i], rhos[j]
            # unknowns (a, b)
            m = [[1 - ri if ri > 0 else 1, 0 if ri > 0 else -ri],
                 [0 if rj > 0 else -rj, 1 - rj if rj > 0 else 1]]
            try:
                c0 = solve_linear(m, [offs[i][0], offs[j][0]])
                c1 = solve_linear(m, [offs[i][1], offs[j][1]])
            except ValueError:
                continue
            lows.append((c0[0], c1[0]))
            highs.append((c0[1], c1[1]))
    return lows, highs


@dataclass(frozen=True)
class CandidateResult:
    directions: tuple  # isolated interval directions, sorted by angle
    slope_cells: tuple  # open slope ranges (lo, hi) where every direction is an interval


def candidate_analysis(ifs: Ifs) -> CandidateResult:
    """All interval directions of a single-node homothety system.

    Every endpoint involved in the depth-1 covering test is one of finitely
    many linear functions of the slope ``t``.  Between consecutive roots of
    their pairwise differences the order of all endpoints is fixed, so the
    covering verdict is constant there; checking every root and one point per
    cell decides all slopes.  The vertical direction is checked separately.
    """
    if not ifs.homothety:
        raise ValueError("candidate solving needs an all-homothety system")
    exact = ifs.exact
    lows, highs = _hull_candidates(ifs)
    rhos = [s.sign * s.ratio for s in ifs.maps]
    offs = [(s.v[0], s.v[1]) for s in ifs.maps]
    family = {}
    for h in lows + highs:
        family[_lin_key(h, exact)] = h
        for r, o in zip(rhos, offs):
            f = (r * h[0] + o[0], r * h[1] + o[1])
            family[_lin_key(f, exact)] = f
    funcs = list(family.values())
    roots = set()
    for k, f in enumerate(funcs):
        for g in funcs[k + 1:]:
            if f[1] != g[1]:
                roots.add((g[0] - f[0]) / (f[1] - g[1]))
    roots = sorted(roots)
    if not exact:
        dedup = []
        roots = sorted(0.0 if abs(r) <= 1e-12 else r for r in roots)
        for r in roots:
            if not dedup or abs(r - dedup[-1]) > 1e-12 * max(1.0, abs(r)):
                dedup.append(r)
        roots = dedup

    group = rotation_group(ifs)

    def is_interval(t):
        return isinstance(decide_interval(induce_system(ifs, Direction(t), group), 0, 1), Interval)

    hits = [Direction(t) for t in roots if is_interval(t)]
    one = 1 if exact else 1.0
    samples = []
    if roots:
        samples.append((None, roots[0], roots[0] - one))
        samples.extend((lo, hi, (lo + hi) / 2) for lo, hi in zip(roots, roots[1:]))
        samples.append((roots[-1], None, roots[-1] + one))
    else:
        samples.append((None, None, 0 * one))
    cells = tuple((lo, hi) for lo, hi, t in samples if is_interval(t))
    if isinstance(decide_interval(induce_system(ifs, VERTICAL, group), 0, 1), Interval):
        hits.append(VERTICAL)
    hits.sort(key=lambda d: d.angle)
    return CandidateResult(tuple(hits), cells)


def solve_candidates(ifs: Ifs):
    """Exact interval directions of a rational all-homothety system."""
    if not ifs.exact:
        raise ValueError("exact candidate solving needs rational data")
    res = candidate_analysis(ifs)
    if res.slope_cells:
        raise ValueError(f"interval projections fill slope ranges {res.slope_cells}")
    return list(res.directions)


# --------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class CertifiedEntry:
    t: str
    theta_rad: float
    interval: tuple
    interval_exact: tuple
    length: float
    length_sq: str
    exact: bool
    source: str = "candidate"

    @property
    def direction(self) -> Direction:
        if self.t == "vertical":
            return VERTICAL
        return Direction(Fraction(self.t) if self.exact else float(self.t))

    def to_dict(self):
        return {
            "t": self.t,
            "theta_rad": self.theta_rad,
            "interval": list(self.interval),
            "interval_exact": list(self.interval_exact),
            "length": self.length,
            "length_sq": self.length_sq,
            "exact": self.exact,
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["t"], d["theta_rad"], tuple(d["interval"]), tuple(d["interval_exact"]),
                   d["length"], d["length_sq"], d["exact"], d.get("source", "candidate"))


def certified_entry(d: Direction, verdict: Interval, source: str = "candidate") -> CertifiedEntry:
    return CertifiedEntry(
        t=d.label(),
        theta_rad=d.angle,
        interval=verdict.normalized(),
        interval_exact=(format_scalar(verdict.lo), format_scalar(verdict.hi)),
        length=verdict.length,
        length_sq=format_scalar(verdict.length_sq),
        exact=verdict.exact,
        source=source,
    )


@dataclass(frozen=True)
class ExcludedEntry:
    lo_rad: float
    hi_rad: float
    theta_rad: float
    t: str
    delta: float
    gap_center: float
    gap_half_width: float
    gap_lo: str
    gap_hi: str
    gap_depth: int
    extent: str

    @property
    def direction(self) -> Direction:
        if self.t == "vertical":
            return VERTICAL
        try:
            return Direction(Fraction(self.t) if "." not in self.t and "e" not in self.t else float(self.t))
        except ValueError:
            return Direction(float(self.t))

    def to_dict(self):
        return {
            "lo_rad": self.lo_rad,
            "hi_rad": self.hi_rad,
            "theta_rad": self.theta_rad,
            "t": self.t,
            "delta": self.delta,
            "gap": {
                "center": self.gap_center,
                "half_width": self.gap_half_width,
                "lo": self.gap_lo,
                "hi": self.gap_hi,
                "depth": self.gap_depth,
            },
            "extent": self.extent,
        }

    @classmethod
    def from_dict(cls, d):
        g = d["gap"]
        return cls(d["lo_rad"], d["hi_rad"], d["theta_rad"], d["t"], d["delta"], g["center"],
                   g["half_width"], g["lo"], g["hi"], g["depth"], d["extent"])


@dataclass(frozen=True)
class IPReport:
    name: str
    shortcut: str | None
    certified: tuple
    certified_arcs: tuple
    excluded: tuple
    undecided: tuple
    residue_rad: float
    params: dict = field(default_factory=dict)
    undecided_verdicts: int = 0
    evaluations: int = 0

    @property
    def complete(self) -> bool:
        return self.residue_rad <= self.params.get("target_residue", 0.0)

    @property
    def excluded_measure(self) -> float:
        return sum(e.hi_rad - e.lo_rad for e in self.excluded)

    def to_dict(self):
        return {
            "name": self.name,
            "shortcut": self.shortcut,
            "certified": [c.to_dict() for c in self.certified],
            "certified_arcs": [list(a) for a in self.certified_arcs],
            "excluded": [e.to_dict() for e in self.excluded],
            "undecided": [{"lo_rad": lo, "hi_rad": hi} for lo, hi in self.undecided],
            "residue_rad": self.residue_rad,
            "undecided_verdicts": self.undecided_verdicts,
            "evaluations": self.evaluations,
            "params": dict(self.params),
            "complete": self.complete,
            "note": CAVEAT,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            name=d.get("name", ""),
            shortcut=d["shortcut"],
            certified=tuple(CertifiedEntry.from_dict(c) for c in d["certified"]),
            certified_arcs=tuple(tuple(a) for a in d.get("certified_arcs", [])),
            excluded=tuple(ExcludedEntry.from_dict(e) for e in d["excluded"]),
            undecided=tuple((u["lo_rad"], u["hi_rad"]) for u in d["undecided"]),
            residue_rad=d["residue_rad"],
            params=dict(d.get("params", {})),
            undecided_verdicts=d.get("undecided_verdicts", 0),
            evaluations=d.get("evaluations", 0),
        )


def _slope_to_angle(t):
    if t is None:
        return math.pi / 2
    return Direction(t).angle


def _arcs_from_cells(cells):
    arcs = []
    for lo, hi in cells:
        a = _slope_to_angle(lo) if lo is not None else math.pi / 2
        b = _slope_to_angle(hi) if hi is not None else math.pi / 2
        if lo is not None and hi is not None and lo < 0 <= hi:
            arcs.append((a, math.pi))
            arcs.append((0.0, b))
        elif a <= b:
            arcs.append((a, b))
        else:
            arcs.append((a, math.pi))
            arcs.append((0.0, b))
    return tuple(sorted(arcs))


def scan_enumerate(ifs: Ifs, target_residue: float = 1e-3, max_depth: int = 12,
                   budget: int = 20000, max_denominator: int = 10**6, cap: int = 1000) -> IPReport:
    """Branch-and-bound over [0, pi) producing an :class:`IPReport`."""
    params = {
        "target_residue": target_residue,
        "max_depth": max_depth,
        "budget": budget,
        "max_denominator": max_denominator,
        "group_cap": cap,
    }
    group = rotation_group(ifs, cap)
    if isinstance(group, ExceedsCap):
        return IPReport(ifs.name, "infinite-rotation-group", (), (), (), (), 0.0, params)
    line = detect_collinear(ifs)
    if isinstance(line, Collinear):
        dx, dy = line.direction
        d = VERTICAL if dx == 0 else Direction(dy / dx)
        verdict = verify_direction(ifs, d, max_depth, group)
        entries = (certified_entry(d, verdict, "collinear"),) if isinstance(verdict, Interval) else ()
        return IPReport(ifs.name, "collinear-segment", entries, ((0.0, math.pi),), (), (), 0.0, params)

    exact = ifs.exact
    certified = {}
    arcs = ()
    if ifs.homothety:
        cand = candidate_analysis(ifs)
        arcs = _arcs_from_cells(cand.slope_cells)
        for d in cand.directions:
            verdict = verify_direction(ifs, d, max_depth, group)
            if isinstance(verdict, Interval):
                certified[d.angle] = certified_entry(d, verdict, "candidate")

    points = sorted(certified)
    pieces = []
    edges = [0.0] + [p for p in points if 0.0 < p < math.pi] + [math.pi]
    for lo, hi in zip(edges, edges[1:]):
        if hi > lo:
            pieces.append((lo, hi))
    for lo, hi in arcs:
        pieces = _subtract(pieces, lo, hi)

    heap = [(-(hi - lo), lo, hi) for lo, hi in pieces]
    heapq.heapify(heap)
    residue = sum(hi - lo for lo, hi in pieces)
    excluded = []
    stuck = []
    evaluations = 0
    undecided_verdicts = 0
    while heap and residue > target_residue and evaluations < budget:
        _, lo, hi = heapq.heappop(heap)
        mid = (lo + hi) / 2
        d = Direction.from_angle(mid, max_denominator if exact else 0)
        theta = d.angle
        if not lo < theta < hi:
            d = Direction.from_angle(mid, None if exact else 0)
            theta = d.angle
            if not lo < theta < hi:
                stuck.append((lo, hi))
                continue
        evaluations += 1
        verdict = verify_direction(ifs, d, max_depth, group)
        if isinstance(verdict, Gap):
            cert = exclusion_radius(verdict.certificate, perpendicular_extent(ifs, d, group), theta)
            a, b = max(lo, cert.lo), min(hi, cert.hi)
            if cert.delta > 0 and b > a:
                g = verdict.certificate
                excluded.append(
                    ExcludedEntry(a, b, theta, d.label(), cert.delta, g.center, g.half_width,
                                  format_scalar(g.lo), format_scalar(g.hi), g.depth,
                                  format_scalar(cert.extent))
                )
                residue -= b - a
                rest = [(lo, a), (b, hi)]
            else:
                rest = [(lo, theta), (theta, hi)]
        elif isinstance(verdict, Interval):
            if not any(abs(theta - p) <= 1e-12 for p in certified):
                certified[theta] = certified_entry(d, verdict, "scan")
            rest = [(lo, theta), (theta, hi)]
        else:
            undecided_verdicts += 1
            rest = [(lo, theta), (theta, hi)]
        for x, y in rest:
            if y > x:
                heapq.heappush(heap, (-(y - x), x, y))
    undecided = sorted([(lo, hi) for _, lo, hi in heap] + stuck)
    residue = sum(hi - lo for lo, hi in undecided)
    return IPReport(
        ifs.name,
        None,
        tuple(certified[k] for k in sorted(certified)),
        arcs,
        tuple(sorted(excluded, key=lambda e: e.lo_rad)),
        tuple(undecided),
        residue,
        params,
        undecided_verdicts,
        evaluations,
    )


def _subtract(pieces, lo, hi):
    out = []
    for a, b in pieces:
        if hi <= a or lo >= b:
            out.append((a, b))
            continue
        if a < lo:
            out.append((a, lo))
        if hi < b:
            out.append((hi, b))
    return out
