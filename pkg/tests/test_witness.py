import json
import math
import random
from fractions import Fraction as F

import pytest

from ssproj.examples import build_example
from ssproj.ifs import IDENTITY, Ifs, Separated, Similarity, certify_ssc
from ssproj.projection import Direction, Interval, Slope
from ssproj.scan import verify_direction
from ssproj.witness import (
    ConvexPolygon,
    CounterexampleLine,
    WitnessCertified,
    WitnessError,
    check_every_line_witness,
    check_invariance,
    check_theta_witness,
    parse_polygon,
    polygon_to_dict,
    witness_report,
)

FC = build_example("four_corner").ifs
RH = build_example("rhombus_square").ifs
EQ = build_example("sierpinski_equilateral").ifs
TRIANGLE = ConvexPolygon(((0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3) / 2)))


def five_map_layout(exact=True):
    """Four corner squares of ratio 2/5 and one tilted centre square.

    The exact variant tilts the centre square by the rotation (3/5, 4/5);
    the float variant turns it by 45 degrees into a diamond.
    """
    r4 = F(2, 5)
    corners = [Similarity(r4, IDENTITY, (a * (1 - r4), b * (1 - r4))) for a, b in [(0, 0), (1, 0), (0, 1), (1, 1)]]
    if exact:
        r = F(1, 5)
        centre = Similarity(r, (F(3, 5), F(-4, 5), F(4, 5), F(3, 5)), (F(1, 2) + r / 10, F(1, 2) - 7 * r / 10))
        return Ifs(tuple(corners + [centre]), "five_map_exact")
    c = math.sqrt(0.5)
    rr = 0.15 * math.sqrt(2)
    fl = [Similarity(float(s.ratio), (1.0, 0.0, 0.0, 1.0), tuple(float(x) for x in s.v)) for s in corners]
    fl.append(Similarity(rr, (c, -c, c, c), (0.5, 0.5 - rr * c)))
    return Ifs(tuple(fl), "five_map_float")


def lines_meeting(poly, rng, n):
    """Random lines (normal, level) that meet ``poly``."""
    out = []
    for _ in range(n):
        ang = rng.uniform(0, math.pi)
        w = (F(math.cos(ang)).limit_denominator(1000), F(math.sin(ang)).limit_denominator(1000))
        if not poly.exact:
            w = tuple(float(x) for x in w)
        lo, hi = poly.project(w)
        s = F(rng.randint(0, 10**6), 10**6)
        out.append((w, lo + (hi - lo) * (s if poly.exact else float(s))))
    return out


def meets(poly, w, level):
    lo, hi = poly.project(w)
    return lo <= level <= hi


def audit_certified(poly, ifs, n=1000, seed=0):
    images = [poly.image(s) for s in ifs.maps]
    rng = random.Random(seed)
    for w, level in lines_meeting(poly, rng, n):
        tol = 0 if poly.exact and ifs.exact else 1e-12
        assert any(meets(im, w, level) or abs(im.project(w)[0] - level) <= tol or abs(im.project(w)[1] - level) <= tol
                   for im in images)


def dense_oracle(poly, ifs, n=3000):
    """Exact covering test at ``n`` rational normals spread over [0, pi)."""
    images = [poly.image(s) for s in ifs.maps]
    for k in range(n):
        ang = math.pi * (k + 0.5) / n
        w = (F(math.cos(ang)).limit_denominator(10**4), F(math.sin(ang)).limit_denominator(10**4))
        if not (poly.exact and ifs.exact):
            w = tuple(float(x) for x in w)
        lo, hi = poly.project(w)
        pieces = sorted(im.project(w) for im in images)
        cursor = lo
        for a, b in pieces:
            if a > cursor + (0 if poly.exact and ifs.exact else 1e-12):
                return False
            cursor = max(cursor, b)
        if cursor < hi - (0 if poly.exact and ifs.exact else 1e-12):
            return False
    return True


def test_polygon_validation():
    with pytest.raises(WitnessError):
        ConvexPolygon(((0, 0), (1, 0)))
    with pytest.raises(WitnessError):
        ConvexPolygon(((0, 0), (0, 1), (1, 1), (1, 0)))  # clockwise
    with pytest.raises(WitnessError):
        ConvexPolygon(((0, 0), (1, 0), (2, 0), (1, 1)))  # collinear run


def test_polygon_document(unit_square):
    text = json.dumps({"vertices": [["0", "0"], ["1", "0"], ["1", "1"], ["0", "1"]]})
    poly = parse_polygon(text)
    assert poly == unit_square and poly.exact
    assert parse_polygon(json.dumps(polygon_to_dict(poly))) == poly
    with pytest.raises(WitnessError):
        parse_polygon('{"vertices": [[0, 0, 1]]}')


def test_invariance(unit_square):
    assert check_invariance(unit_square, FC)
    bad = Ifs((Similarity(F(1, 2), IDENTITY, (F(1), F(1))),))
    assert not check_invariance(unit_square, bad)
    assert check_invariance(TRIANGLE, EQ)


def test_theta_witness(unit_square):
    for t in (0.0, math.sqrt(3), -math.sqrt(3)):
        assert check_theta_witness(TRIANGLE, EQ, Direction(t))
    assert not check_theta_witness(TRIANGLE, EQ, Direction(1.0))
    assert not check_theta_witness(unit_square, FC, Slope(0))
    assert check_theta_witness(unit_square, FC, Slope("1/2"))


def test_theta_witness_needs_homotheties(unit_square):
    with pytest.raises(WitnessError):
        check_theta_witness(unit_square, five_map_layout(), Slope(0))


def test_theta_witness_matches_verify(unit_square):
    for t in ("1/2", "2", "-1/2", "-2"):
        assert check_theta_witness(unit_square, FC, Slope(t))
        v = verify_direction(FC, Slope(t))
        assert isinstance(v, Interval)
        assert (v.lo, v.hi) == unit_square.project(Slope(t).functional)


def test_witness_requires_invariance(unit_square):
    bad = Ifs((Similarity(F(1, 2), IDENTITY, (F(1), F(1))),))
    with pytest.raises(WitnessError):
        check_every_line_witness(unit_square, bad)


def test_rhombus_counterexample(unit_square):
    res = check_every_line_witness(unit_square, RH)
    assert isinstance(res, CounterexampleLine)
    assert res.verify(unit_square, RH)
    line = CounterexampleLine((F(1), F(1)), F(1, 10))
    assert line.verify(unit_square, RH)


def test_shrunk_square_counterexample(unit_square):
    # the line x = 1/1000 meets the square and misses [0.005, 0.995]^2
    one = Ifs((Similarity(F(99, 100), IDENTITY, (F(1, 200), F(1, 200))),))
    assert not dense_oracle(unit_square, one, n=50)
    res = check_every_line_witness(unit_square, one)
    assert isinstance(res, CounterexampleLine)
    assert res.verify(unit_square, one)
    assert CounterexampleLine((F(1), F(0)), F(1, 1000)).verify(unit_square, one)


def test_five_map_exact_layout(unit_square):
    ifs = five_map_layout(exact=True)
    assert check_invariance(unit_square, ifs)
    assert isinstance(certify_ssc(ifs), Separated)
    assert dense_oracle(unit_square, ifs)
    res = check_every_line_witness(unit_square, ifs)
    assert isinstance(res, WitnessCertified)
    audit_certified(unit_square, ifs)


def test_five_map_float_layout():
    sq = ConvexPolygon(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))
    ifs = five_map_layout(exact=False)
    assert isinstance(certify_ssc(ifs), Separated)
    assert dense_oracle(sq, ifs)
    assert isinstance(check_every_line_witness(sq, ifs), WitnessCertified)
    audit_certified(sq, ifs)


def test_shrinking_centre_breaks_witness(unit_square):
    r4 = F(2, 5)
    corners = [Similarity(r4, IDENTITY, (a * (1 - r4), b * (1 - r4))) for a, b in [(0, 0), (1, 0), (0, 1), (1, 1)]]
    r = F(1, 10)
    centre = Similarity(r, (F(3, 5), F(-4, 5), F(4, 5), F(3, 5)), (F(1, 2) + r / 10, F(1, 2) - 7 * r / 10))
    ifs = Ifs(tuple(corners + [centre]))
    res = check_every_line_witness(unit_square, ifs)
    assert isinstance(res, CounterexampleLine) and res.verify(unit_square, ifs)
    assert not dense_oracle(unit_square, ifs, n=2000)


def test_four_corner_every_line_fails(unit_square):
    res = check_every_line_witness(unit_square, FC)
    assert isinstance(res, CounterexampleLine) and res.verify(unit_square, FC)


def test_reports(unit_square):
    assert witness_report(True)["verdict"] == "witness"
    rep = witness_report(check_every_line_witness(unit_square, RH))
    assert rep["verdict"] == "counterexample"
    assert set(rep["evidence"]) == {"normal", "level"}
    assert witness_report(check_every_line_witness(unit_square, five_map_layout()))["verdict"] == "certified"
