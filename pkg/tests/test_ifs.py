import json
import math
import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import homothety_systems
from ssproj.examples import EXAMPLE_IDS, build_example
from ssproj.ifs import (
    IDENTITY,
    BudgetError,
    Collinear,
    ExceedsCap,
    FiniteGroup,
    Ifs,
    IfsError,
    NotCollinear,
    NotSeparated,
    Separated,
    Similarity,
    attractor_ball,
    certify_ssc,
    cylinder_cover,
    detect_collinear,
    ifs_to_dict,
    mat_mul,
    parse_ifs,
    rotation_group,
    serialize_ifs,
    similarity_dimension,
    support_bound,
    word_map,
)

FOUR_CORNER_DOC = json.dumps({
    "name": "four corner",
    "maps": [
        {"r": "1/4", "v": ["0", "0"]},
        {"r": "1/4", "v": ["3/4", "0"]},
        {"r": "1/4", "v": ["0", "3/4"]},
        {"r": "1/4", "v": ["3/4", "3/4"]},
    ],
})


def doc(*maps, **top):
    return json.dumps({"name": "t", "maps": list(maps), **top})


# parsing

def test_parse_four_corner():
    ifs = parse_ifs(FOUR_CORNER_DOC)
    assert len(ifs) == 4
    assert ifs.homothety and ifs.exact
    assert ifs.maps[3].v == (F(3, 4), F(3, 4))
    assert ifs.maps[0].ratio == F(1, 4)


def test_parse_rejects_ratio_above_one():
    with pytest.raises(IfsError, match="outside"):
        parse_ifs(doc({"r": "5/4", "v": ["0", "0"]}))


def test_parse_pythagorean_rotation_is_exact():
    ifs = parse_ifs(doc({"r": "1/2", "v": ["0", "0"], "cos": "3/5", "sin": "4/5"}))
    assert ifs.exact
    assert ifs.maps[0].rot == (F(3, 5), F(-4, 5), F(4, 5), F(3, 5))
    assert not ifs.homothety


@pytest.mark.parametrize("text", [
    "not json",
    json.dumps({"maps": []}),
    json.dumps({"maps": [{"v": ["0", "0"]}]}),
    doc({"r": "1/2", "v": ["0"]}),
    doc({"r": "1/2", "v": ["0", "0"], "cos": "1/2", "sin": "1/2"}),
    doc({"r": "1/2", "v": ["0", "0"], "cos": "1"}),
    doc({"r": "0", "v": ["0", "0"]}),
    doc({"r": "1/2", "v": ["0", "0"], "shear": "1"}),
    doc({"r": "abc", "v": ["0", "0"]}),
])
def test_parse_errors(text):
    with pytest.raises(IfsError):
        parse_ifs(text)


def test_rotation_deg_is_approximate():
    ifs = parse_ifs(doc({"r": "1/2", "v": ["0", "0"], "rotation_deg": "90"}))
    assert not ifs.exact
    a, b, c, d = ifs.maps[0].rot
    assert abs(a) < 1e-15 and abs(c - 1) < 1e-15


def test_reflect_flag():
    ifs = parse_ifs(doc({"r": "1/2", "v": ["0", "0"], "reflect": True}))
    assert ifs.maps[0].rot == (1, 0, 0, -1)
    assert ifs.maps[0].det < 0


@pytest.mark.parametrize("example_id", EXAMPLE_IDS)
def test_examples_round_trip(example_id):
    ifs = build_example(example_id).ifs
    back = parse_ifs(serialize_ifs(ifs))
    assert back.exact == ifs.exact
    if ifs.exact:
        assert back == ifs
    else:
        for s, t in zip(ifs.maps, back.maps):
            assert s.ratio == t.ratio and s.v == t.v
            assert all(abs(x - y) < 1e-15 for x, y in zip(s.rot, t.rot))


def test_round_trip_reflection_with_rotation():
    ifs = parse_ifs(doc({"r": "1/3", "v": ["1/2", "0"], "cos": "3/5", "sin": "4/5", "reflect": True}))
    assert parse_ifs(serialize_ifs(ifs)) == ifs
    assert ifs_to_dict(ifs)["maps"][0]["reflect"] is True


# dimension

def test_dimension_three_thirds():
    ifs = Ifs(tuple(Similarity(F(1, 3), IDENTITY, (F(k), F(0))) for k in range(3)))
    assert similarity_dimension(ifs) == 1


def test_dimension_four_quarters():
    assert similarity_dimension(build_example("four_corner").ifs) == 1


def test_dimension_five_thirds():
    ifs = Ifs(tuple(Similarity(F(1, 3), IDENTITY, (F(k), F(0))) for k in range(5)))
    s = similarity_dimension(ifs)
    assert abs(s - math.log(5) / math.log(3)) <= 1e-11
    assert abs(5 * (1 / 3) ** s - 1) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(homothety_systems(min_maps=2, max_maps=4), st.integers(1, 7))
def test_dimension_grows_with_an_extra_map(ifs, k):
    bigger = Ifs(ifs.maps + (Similarity(F(k, 8), IDENTITY, (F(0), F(0))),))
    assert float(similarity_dimension(bigger)) > float(similarity_dimension(ifs))


# rotation group

def rot90():
    return Similarity(F(1, 2), (0, -1, 1, 0), (F(0), F(0)))


def test_group_trivial():
    g = rotation_group(build_example("four_corner").ifs)
    assert isinstance(g, FiniteGroup) and g.order == 1


def test_group_quarter_turn():
    g = rotation_group(Ifs((rot90(), Similarity(F(1, 2), IDENTITY, (F(1, 2), F(0))))))
    assert g.order == 4


def test_group_irrational_rotation():
    g = rotation_group(build_example("irrational_rotation_demo").ifs, cap=1000)
    assert isinstance(g, ExceedsCap) and g.cap == 1000


def test_group_is_closed():
    refl = Similarity(F(1, 3), (1, 0, 0, -1), (F(0), F(0)))
    g = rotation_group(Ifs((rot90(), refl)))
    assert g.order == 8
    elements = set(g.elements)
    assert IDENTITY in elements
    for a in g.elements:
        for b in g.elements:
            assert mat_mul(a, b) in elements


# support and covers

def test_support_four_corner():
    fc = build_example("four_corner").ifs
    assert support_bound(fc, (1, 0)) == 1
    assert support_bound(fc, (0, -1)) == 0


def test_support_single_point():
    ifs = Ifs((Similarity(F(1, 2), IDENTITY, (F(1), F(0))),))
    assert support_bound(ifs, (1, 0)) == 2


@settings(max_examples=30, deadline=None)
@given(homothety_systems(), st.floats(0, 2 * math.pi))
def test_support_is_sound(ifs, ang):
    u = (math.cos(ang), math.sin(ang))
    h = float(support_bound(ifs, u))
    # fixed points of words lie in the attractor
    for word in [(i, j, k) for i in range(len(ifs)) for j in range(len(ifs)) for k in range(len(ifs))]:
        p = word_map(ifs, word).fixed_point()
        assert u[0] * float(p[0]) + u[1] * float(p[1]) <= h + 1e-12


def test_float_support_matches_exact():
    from ssproj.ifs import _support_branch_and_bound

    fc = build_example("rhombus_square").ifs
    for u in [(1.0, 0.0), (0.6, 0.8), (-1.0, 0.3)]:
        exact = float(support_bound(fc, tuple(F(x) for x in u)))
        approx = _support_branch_and_bound(fc, u)
        assert exact - 1e-15 <= approx <= exact + 1e-9


def test_cylinder_cover_shapes():
    fc = build_example("four_corner").ifs
    _, r0 = attractor_ball(fc)
    (root,) = cylinder_cover(fc, 0)
    assert root.radius == r0
    level1 = cylinder_cover(fc, 1)
    assert len(level1) == 4 and all(b.radius == r0 / 4 for b in level1)
    level2 = cylinder_cover(fc, 2)
    assert len(level2) == 16 and all(b.radius == r0 / 16 for b in level2)


def test_cylinder_cover_nesting():
    ifs = build_example("sierpinski_right").ifs
    parents = {b.word: b for b in cylinder_cover(ifs, 2)}
    for child in cylinder_cover(ifs, 3):
        p = parents[child.word[:2]]
        dist = math.hypot(float(child.center[0] - p.center[0]), float(child.center[1] - p.center[1]))
        assert dist + float(child.radius) <= float(p.radius) + 1e-12


def test_cylinder_cover_budget():
    with pytest.raises(BudgetError):
        cylinder_cover(build_example("four_corner").ifs, 6, budget=100)


# separation

def test_ssc_four_corner():
    res = certify_ssc(build_example("four_corner").ifs)
    assert isinstance(res, Separated)
    assert res.min_gap > 0


def test_ssc_equilateral():
    assert isinstance(certify_ssc(build_example("sierpinski_equilateral").ifs), Separated)


def test_ssc_touching_segment():
    res = certify_ssc(build_example("segment").ifs)
    assert isinstance(res, NotSeparated)
    assert res.point == (F(1, 2), F(0))


def test_ssc_gap_audit():
    ifs = build_example("four_corner").ifs
    res = certify_ssc(ifs)
    rng = np.random.default_rng(7)
    for _ in range(1000):
        i, j = rng.choice(4, size=2, replace=False)
        wa = (int(i),) + tuple(int(x) for x in rng.integers(0, 4, 8))
        wb = (int(j),) + tuple(int(x) for x in rng.integers(0, 4, 8))
        p, q = word_map(ifs, wa).fixed_point(), word_map(ifs, wb).fixed_point()
        assert math.hypot(float(p[0] - q[0]), float(p[1] - q[1])) >= res.min_gap


# collinearity

def test_collinear_segment():
    res = detect_collinear(build_example("segment").ifs)
    assert isinstance(res, Collinear)
    assert res.direction[1] == 0


def test_four_corner_not_collinear():
    assert isinstance(detect_collinear(build_example("four_corner").ifs), NotCollinear)


def test_single_map_collinear():
    ifs = Ifs((Similarity(F(1, 2), IDENTITY, (F(1), F(1))),))
    assert isinstance(detect_collinear(ifs), Collinear)


def test_collinear_diagonal():
    ifs = Ifs((Similarity(F(1, 3), IDENTITY, (F(0), F(0))), Similarity(F(1, 2), IDENTITY, (F(1, 2), F(1, 2)))))
    res = detect_collinear(ifs)
    assert isinstance(res, Collinear)
    assert res.direction[0] == res.direction[1]


def test_random_word_map_matches_composition():
    rng = random.Random(3)
    ifs = build_example("rhombus_square").ifs
    word = tuple(rng.randrange(4) for _ in range(5))
    p = (F(1, 3), F(2, 7))
    q = p
    for i in reversed(word):
        q = ifs.maps[i](q)
    assert word_map(ifs, word)(p) == q
