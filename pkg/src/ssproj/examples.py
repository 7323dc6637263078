"""Built-in example systems.

``rhombus_square`` is a reconstruction: four ratio-1/4 homotheties of the unit
square whose images tile both coordinate projections, whose fixed points
(0,1), (1/3,1/3), (2/3,2/3), (1,0) span a rhombus, and whose natural measure
has a negative centred cross moment.  The mirror image would give +1/15.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction as F

from .ifs import IDENTITY, Ifs, Similarity

EXAMPLE_IDS = (
    "sierpinski_equilateral",
    "sierpinski_right",
    "four_corner",
    "rhombus_square",
    "segment",
    "irrational_rotation_demo",
)


@dataclass(frozen=True)
class ExampleInfo:
    ifs: Ifs
    description: str
    expected_count: int | None = None
    # slopes as strings ("vertical" for the vertical line)
    expected_slopes: tuple = ()
    # squared normalized lengths, exact strings where available
    expected_lengths_sq: tuple = ()
    expected_covariance: tuple | None = None
    shortcut: str | None = None
    notes: str = ""


def _homotheties(ratio, translations, name, one=None):
    rot = IDENTITY if one is None else (one, 0.0, 0.0, one)
    return Ifs(tuple(Similarity(ratio, rot, tuple(v)) for v in translations), name)


def sierpinski_equilateral() -> Ifs:
    h = math.sqrt(3) / 2
    corners = [(0.0, 0.0), (1.0, 0.0), (0.5, h)]
    third = 1.0 / 3.0
    return _homotheties(third, [(2 * x / 3, 2 * y / 3) for x, y in corners],
                        "sierpinski_equilateral", one=1.0)


def sierpinski_right() -> Ifs:
    corners = [(0, 0), (1, 0), (0, 1)]
    return _homotheties(F(1, 3), [(F(2, 3) * x, F(2, 3) * y) for x, y in corners],
                        "sierpinski_right")


def four_corner() -> Ifs:
    q = F(3, 4)
    return _homotheties(F(1, 4), [(0, 0), (q, 0), (0, q), (q, q)], "four_corner")


def rhombus_square() -> Ifs:
    vs = [(F(0), F(3, 4)), (F(1, 4), F(1, 4)), (F(1, 2), F(1, 2)), (F(3, 4), F(0))]
    return _homotheties(F(1, 4), vs, "rhombus_square")


def segment() -> Ifs:
    return _homotheties(F(1, 2), [(F(0), F(0)), (F(1, 2), F(0))], "segment")


def irrational_rotation_demo() -> Ifs:
    c, s = math.cos(1.0), math.sin(1.0)
    return Ifs(
        (
            Similarity(0.5, (c, -s, s, c), (0.0, 0.0)),
            Similarity(0.5, (1.0, 0.0, 0.0, 1.0), (0.5, 0.0)),
        ),
        "irrational_rotation_demo",
    )


def build_example(example_id: str) -> ExampleInfo:
    if example_id == "sierpinski_equilateral":
        return ExampleInfo(
            sierpinski_equilateral(),
            "ratio-1/3 homotheties fixing the corners of the unit equilateral triangle",
            expected_count=3,
            expected_slopes=("0", "sqrt(3)", "-sqrt(3)"),
            expected_lengths_sq=("1", "1", "1"),
            expected_covariance=("1/12", "0", "1/12"),
            notes="approximate (float) mode: the corner (1/2, sqrt(3)/2) is irrational",
        )
    if example_id == "sierpinski_right":
        return ExampleInfo(
            sierpinski_right(),
            "ratio-1/3 homotheties fixing (0,0), (1,0), (0,1); affine image of the equilateral case",
            expected_count=3,
            expected_slopes=("1/2", "2", "-1"),
            expected_lengths_sq=("4/5", "4/5", "2"),
        )
    if example_id == "four_corner":
        return ExampleInfo(
            four_corner(),
            "ratio-1/4 homotheties fixing the corners of the unit square",
            expected_count=4,
            expected_slopes=("1/2", "2", "-1/2", "-2"),
            expected_lengths_sq=("9/5",) * 4,
            expected_covariance=("3/20", "0", "3/20"),
        )
    if example_id == "rhombus_square":
        return ExampleInfo(
            rhombus_square(),
            "ratio-1/4 homotheties of the unit square, fixed points on a rhombus",
            expected_count=4,
            expected_slopes=("0", "vertical", "4/5", "5/4"),
            expected_lengths_sq=("1", "1", "9/41", "9/41"),
            expected_covariance=("1/12", "-1/15", "1/12"),
            notes="reconstructed layout; the reflected layout has cross moment +1/15",
        )
    if example_id == "segment":
        return ExampleInfo(
            segment(),
            "two halves of the unit segment on the x-axis",
            shortcut="collinear-segment",
            expected_covariance=("1/12", "0", "0"),
        )
    if example_id == "irrational_rotation_demo":
        return ExampleInfo(
            irrational_rotation_demo(),
            "one map rotates by 1 radian, so the rotation group is infinite",
            expected_count=0,
            shortcut="infinite-rotation-group",
        )
    raise KeyError(f"unknown example id {example_id!r}; choose from {', '.join(EXAMPLE_IDS)}")
