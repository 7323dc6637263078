"""Interval projections of planar self-similar sets."""
from .examples import EXAMPLE_IDS, build_example
from .ifs import Ifs, IfsError, Similarity, certify_ssc, parse_ifs, rotation_group, serialize_ifs, similarity_dimension
from .moments import (
    check_inertia_theorem,
    fit_form_from_three,
    inertia_form,
    measure_covariance,
    measure_mean,
    projection_uniformity,
)
from .projection import VERTICAL, Direction, Gap, Interval, Slope, Undecided, decide_interval, induce_system
from .scan import IPReport, scan_enumerate, verify_direction
from .witness import ConvexPolygon, check_every_line_witness, check_invariance, check_theta_witness

__all__ = [
    "EXAMPLE_IDS", "build_example", "Ifs", "IfsError", "Similarity", "certify_ssc", "parse_ifs",
    "rotation_group", "serialize_ifs", "similarity_dimension", "check_inertia_theorem",
    "fit_form_from_three", "inertia_form", "measure_covariance", "measure_mean",
    "projection_uniformity", "VERTICAL", "Direction", "Gap", "Interval", "Slope", "Undecided",
    "decide_interval", "induce_system", "IPReport", "scan_enumerate", "verify_direction",
    "ConvexPolygon", "check_every_line_witness", "check_invariance", "check_theta_witness",
]
