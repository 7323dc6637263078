import random
from fractions import Fraction as F

import pytest
from hypothesis import strategies as st

from ssproj.ifs import IDENTITY, Ifs, Similarity


def rational(lo, hi, maxden=12):
    return st.builds(
        lambda n, d: F(n, d),
        st.integers(lo * maxden, hi * maxden),
        st.just(maxden),
    )


@st.composite
def homothety_systems(draw, min_maps=2, max_maps=5, unit_sum=False):
    """Random exact homothety systems with translations in [0, 1]^2."""
    m = draw(st.integers(min_maps, max_maps))
    if unit_sum:
        cuts = sorted(draw(st.lists(st.integers(1, 59), min_size=m - 1, max_size=m - 1, unique=True)))
        edges = [0] + cuts + [60]
        ratios = [F(b - a, 60) for a, b in zip(edges, edges[1:])]
    else:
        ratios = [F(draw(st.integers(1, 7)), 8) for _ in range(m)]
    maps = []
    for r in ratios:
        v = (F(draw(st.integers(0, 16)), 16), F(draw(st.integers(0, 16)), 16))
        maps.append(Similarity(r, IDENTITY, v))
    return Ifs(tuple(maps), "random")


def random_unit_sum_system(rng: random.Random):
    """Rational homothety system with ratios summing to one (plain RNG)."""
    m = rng.randint(2, 5)
    cuts = sorted(rng.sample(range(1, 60), m - 1))
    edges = [0] + cuts + [60]
    maps = []
    for a, b in zip(edges, edges[1:]):
        v = (F(rng.randint(0, 24), 24), F(rng.randint(0, 24), 24))
        maps.append(Similarity(F(b - a, 60), IDENTITY, v))
    return Ifs(tuple(maps), "random")


@pytest.fixture
def unit_square():
    from ssproj.witness import ConvexPolygon

    return ConvexPolygon(((F(0), F(0)), (F(1), F(0)), (F(1), F(1)), (F(0), F(1))))
