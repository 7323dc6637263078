"""Moments of the natural self-similar measure and the inertia form.

The natural measure satisfies ``mu = sum_i w_i (S_i)_* mu`` with default
weights ``w_i = r_i^s``.  First and second moments then solve small linear
systems, exactly when the data are rational.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .ifs import Ifs, similarity_dimension
from .numeric import FLOAT_TOL, all_exact, close, format_scalar, is_exact, solve_linear
from .projection import Direction, Interval, induce_system, solve_hull


class InconsistentProjections(ValueError):
    """Three projected means that no single point can produce."""


def natural_weights(ifs: Ifs):
    s = similarity_dimension(ifs)
    if is_exact(s) and s == 1:
        return [sm.ratio for sm in ifs.maps]
    if len(ifs) == 1:
        return [Fraction(1) if ifs.exact else 1.0]
    return [float(sm.ratio) ** float(s) for sm in ifs.maps]


def _weights(ifs, weights):
    if weights is None:
        return natural_weights(ifs)
    weights = list(weights)
    if len(weights) != len(ifs) or any(w <= 0 for w in weights):
        raise ValueError("need one positive weight per map")
    if not close(sum(weights), 1):
        raise ValueError("weights must sum to 1")
    return weights


def measure_mean(ifs: Ifs, weights=None):
    """Solve ``m = sum_i w_i (r_i T_i m + v_i)``."""
    w = _weights(ifs, weights)
    a = [[1, 0], [0, 1]]
    rhs = [0, 0]
    for wi, s in zip(w, ifs.maps):
        t = s.rot
        a[0][0] -= wi * s.ratio * t[0]
        a[0][1] -= wi * s.ratio * t[1]
        a[1][0] -= wi * s.ratio * t[2]
        a[1][1] -= wi * s.ratio * t[3]
        rhs[0] += wi * s.v[0]
        rhs[1] += wi * s.v[1]
    return tuple(solve_linear(a, rhs))


def measure_covariance(ifs: Ifs, weights=None):
    """Centred second-moment matrix ``((C_xx, C_xy), (C_xy, C_yy))``.

    The raw moment ``Q`` solves
    ``Q = sum_i w_i (r^2 T Q T^t + r T m v^t + r v m^t T^t + v v^t)``,
    three unknowns by symmetry.
    """
    w = _weights(ifs, weights)
    m = measure_mean(ifs, w)
    # unknown vector q = (Qxx, Qxy, Qyy); build q - L(q) = const
    a = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    rhs = [0, 0, 0]
    for wi, s in zip(w, ifs.maps):
        t0, t1, t2, t3 = s.rot
        r2 = s.ratio * s.ratio
        # (T Q T^t)_xx = t0^2 Qxx + 2 t0 t1 Qxy + t1^2 Qyy, etc.
        coeffs = [
            (t0 * t0, 2 * t0 * t1, t1 * t1),
            (t0 * t2, t0 * t3 + t1 * t2, t1 * t3),
            (t2 * t2, 2 * t2 * t3, t3 * t3),
        ]
        for row in range(3):
            for col in range(3):
                a[row][col] -= wi * r2 * coeffs[row][col]
        tm = (t0 * m[0] + t1 * m[1], t2 * m[0] + t3 * m[1])
        v = s.v
        cross = (
            2 * s.ratio * tm[0] * v[0],
            s.ratio * (tm[0] * v[1] + v[0] * tm[1]),
            2 * s.ratio * tm[1] * v[1],
        )
        vv = (v[0] * v[0], v[0] * v[1], v[1] * v[1])
        for row in range(3):
            rhs[row] += wi * (cross[row] + vv[row])
    qxx, qxy, qyy = solve_linear(a, rhs)
    cxx = qxx - m[0] * m[0]
    cxy = qxy - m[0] * m[1]
    cyy = qyy - m[1] * m[1]
    return ((cxx, cxy), (cxy, cyy))


def _unit(gamma):
    """``gamma`` is an angle (float) or an exact ``(cos, sin)`` pair."""
    if isinstance(gamma, tuple):
        return gamma
    return (math.cos(gamma), math.sin(gamma))


def inertia_form(c, gamma):
    """``u^t C u`` at ``u = (cos gamma, sin gamma)``."""
    co, si = _unit(gamma)
    return co * co * c[0][0] + 2 * co * si * c[0][1] + si * si * c[1][1]


def _angle_of(gamma) -> float:
    co, si = _unit(gamma)
    a = math.atan2(float(si), float(co))
    return a % math.pi


def _distinct_mod_pi(gammas):
    units = [_unit(g) for g in gammas]
    for i in range(len(units)):
        for j in range(i + 1, len(units)):
            (c1, s1), (c2, s2) = units[i], units[j]
            cross = c1 * s2 - s1 * c2
            if all_exact((c1, s1, c2, s2)):
                if cross == 0:
                    return False
            elif abs(float(cross)) <= 1e-12:
                return False
    return True


def fit_form_from_three(pairs):
    """Recover ``C`` from ``(gamma_i, value_i)`` at three angles distinct mod pi."""
    pairs = list(pairs)
    if len(pairs) != 3:
        raise ValueError("need exactly three (angle, value) pairs")
    if not _distinct_mod_pi([g for g, _ in pairs]):
        raise ValueError("angles must be pairwise distinct modulo pi (singular system)")
    rows, rhs = [], []
    for g, val in pairs:
        co, si = _unit(g)
        rows.append([co * co, 2 * co * si, si * si])
        rhs.append(val)
    cxx, cxy, cyy = solve_linear(rows, rhs)
    return ((cxx, cxy), (cxy, cyy))


def mean_from_projection_means(triples, tol: float = 1e-12):
    """Point ``m`` with ``u_gamma . m = value`` at three directions."""
    triples = list(triples)
    if len(triples) != 3:
        raise ValueError("need exactly three (angle, value) pairs")
    if not _distinct_mod_pi([g for g, _ in triples]):
        raise ValueError("angles must be pairwise distinct modulo pi")
    (g1, p1), (g2, p2), (g3, p3) = triples
    u1, u2, u3 = _unit(g1), _unit(g2), _unit(g3)
    m = solve_linear([list(u1), list(u2)], [p1, p2])
    resid = u3[0] * m[0] + u3[1] * m[1] - p3
    values = (*u1, *u2, *u3, p1, p2, p3)
    ok = resid == 0 if all_exact(values) else abs(float(resid)) <= tol * max(1.0, abs(float(p3)))
    if not ok:
        raise InconsistentProjections(f"third projection mean off by {float(resid):.3g}")
    return tuple(m)


# --------------------------------------------------------------------------
# the c^2/12 identity


@dataclass(frozen=True)
class TheoremCheck:
    applicable: bool
    passed: bool
    c2: object = None
    c2_over_12: object = None
    samples: tuple = ()  # (gamma, inertia value)
    reason: str = ""

    def to_dict(self):
        return {
            "applicable": self.applicable,
            "pass": self.passed,
            "c": math.sqrt(float(self.c2)) if self.c2 is not None else None,
            "c2": format_scalar(self.c2) if self.c2 is not None else None,
            "c2_over_12": format_scalar(self.c2_over_12) if self.c2_over_12 is not None else None,
            "samples": [{"gamma": float(_angle_of(g)), "value": format_scalar(v)} for g, v in self.samples],
            "reason": self.reason,
        }


DEFAULT_GAMMAS = ((1, 0), math.pi / 7, 1.0, 2.5)


def check_inertia_theorem(ifs: Ifs, report, tol: float = 1e-9, gammas=DEFAULT_GAMMAS) -> TheoremCheck:
    """Compare the inertia form with ``c^2/12`` for equal-length certified projections."""
    entries = list(report.certified)
    if len(entries) < 3:
        return TheoremCheck(False, False, reason=f"only {len(entries)} certified interval directions")
    mean = measure_mean(ifs)
    c2s = [Fraction(e.length_sq) if e.exact else float(e.length_sq) for e in entries]
    c2 = c2s[0]
    for e, v in zip(entries, c2s):
        if not close(v, c2, tol=tol):
            return TheoremCheck(False, False, reason=f"unequal lengths: {[e.length_sq for e in entries]}")
    for e in entries:
        d = e.direction
        lo, hi = (Fraction(x) for x in e.interval_exact) if e.exact else (float(x) for x in e.interval_exact)
        f = d.functional
        if not close((lo + hi) / 2, f[0] * mean[0] + f[1] * mean[1], tol=tol):
            return TheoremCheck(False, False, c2, reason=f"direction {e.t}: interval not centred at the mean")
    cov = measure_covariance(ifs)
    target = c2 / 12
    samples = tuple((g, inertia_form(cov, g)) for g in gammas)
    passed = all(close(v, target, tol=tol) for _, v in samples)
    passed = passed and close(cov[0][1], 0, tol=tol) and close(cov[0][0], cov[1][1], tol=tol)
    return TheoremCheck(True, passed, c2, target, samples)


# --------------------------------------------------------------------------
# projected measure


def projection_uniformity(ifs: Ifs, d: Direction, depth: int, weights=None):
    """Sup distance between the depth-``depth`` step distribution and uniform.

    Each cylinder's mass is placed at the midpoint of its projected hull
    image; the result is compared with the uniform distribution function on
    the projection interval.
    """
    if not ifs.homothety:
        raise ValueError("projection_uniformity needs a single-node homothety system")
    sys = induce_system(ifs, d)
    (a, b), = solve_hull(sys)
    from .projection import decide_interval

    if not isinstance(decide_interval(sys, 0, 1), Interval):
        raise ValueError("direction is not an interval projection")
    if a == b:
        return 0.0
    w = np.array([float(x) for x in _weights(ifs, weights)])
    rho = np.array([float(e.rho) for e in sys.edges[0]])
    off = np.array([float(e.offset) for e in sys.edges[0]])
    # composed maps x -> R x + O and masses of all depth-k cylinders
    big_r, big_o, mass = np.ones(1), np.zeros(1), np.ones(1)
    for _ in range(depth):
        big_o = (big_o[:, None] + big_r[:, None] * off[None, :]).ravel()
        big_r = (big_r[:, None] * rho[None, :]).ravel()
        mass = (mass[:, None] * w[None, :]).ravel()
    af, bf = float(a), float(b)
    mids = big_o + big_r * (af + bf) / 2
    order = np.argsort(mids, kind="stable")
    mids, mass = mids[order], mass[order]
    uniform = (mids - af) / (bf - af)
    after = np.cumsum(mass)
    before = after - mass
    return float(max(np.abs(after - uniform).max(), np.abs(before - uniform).max()))
