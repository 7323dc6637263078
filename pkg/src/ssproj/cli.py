"""The ``ssproj`` command line.

Exit codes: 0 success, 1 usage, 2 parse or validation error, 3 analysis
incomplete (residue above target or an undecided verdict).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import examples as ex
from .ifs import (
    ExceedsCap,
    IfsError,
    NotSeparated,
    Separated,
    certify_ssc,
    parse_ifs,
    rotation_group,
    serialize_ifs,
    similarity_dimension,
)
from .moments import check_inertia_theorem, inertia_form, measure_covariance, measure_mean
from .numeric import format_scalar
from .projection import VERTICAL, Gap, InfiniteGroupError, Interval, Slope
from .render import attractor_points, points_csv, render_angle_diagram, render_points, render_projection_cover
from .scan import scan_enumerate, verify_direction
from .witness import (
    WitnessError,
    check_every_line_witness,
    check_theta_witness,
    parse_polygon,
    witness_report,
)

OK, USAGE, INVALID, INCOMPLETE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE)


def _scalar(x):
    """Exact string plus decimal rendering."""
    return {"exact": format_scalar(x), "decimal": float(x)}


def load_ifs(source: str):
    if source in ex.EXAMPLE_IDS and not os.path.exists(source):
        return ex.build_example(source).ifs
    try:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IfsError(f"cannot read {source}: {exc.strerror}") from None
    return parse_ifs(text)


def _direction(args):
    if args.vertical and args.slope is not None:
        raise UsageError("give --slope or --vertical, not both")
    if args.vertical:
        return VERTICAL
    if args.slope is None:
        return None
    try:
        return Slope(args.slope)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--slope expects p/q, got {args.slope!r}") from None


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def verdict_document(d, verdict) -> dict:
    doc = {"direction": d.label(), "theta_rad": d.angle}
    if isinstance(verdict, Interval):
        lo, hi = verdict.normalized()
        doc.update(
            verdict="interval",
            exactness=verdict.exactness,
            interval=[lo, hi],
            interval_exact=[format_scalar(verdict.lo), format_scalar(verdict.hi)],
            norm_sq=format_scalar(d.norm_sq),
            length=verdict.length,
            length_sq=format_scalar(verdict.length_sq),
        )
    elif isinstance(verdict, Gap):
        g = verdict.certificate
        doc.update(
            verdict="gap",
            gap={"lo": format_scalar(g.lo), "hi": format_scalar(g.hi), "center": g.center,
                 "half_width": g.half_width, "depth": g.depth},
            hull=[format_scalar(x) for x in g.hull],
        )
    else:
        doc.update(verdict="undecided", depth=verdict.depth)
    return doc


def _scan(args, ifs):
    return scan_enumerate(ifs, target_residue=args.residue, max_depth=args.max_depth, budget=args.budget)


def cmd_analyze(args):
    ifs = load_ifs(args.input)
    report = _scan(args, ifs)
    _emit(_dump(report.to_dict()), args.out)
    if args.svg:
        _emit(render_angle_diagram(report), args.svg)
    return OK if report.complete else INCOMPLETE


def cmd_project(args):
    ifs = load_ifs(args.input)
    d = _direction(args)
    if d is None:
        raise UsageError("project needs --slope p/q or --vertical")
    verdict = verify_direction(ifs, d, args.max_depth)
    _emit(_dump(verdict_document(d, verdict)), args.out)
    return OK if isinstance(verdict, (Interval, Gap)) else INCOMPLETE


def cmd_moments(args):
    ifs = load_ifs(args.input)
    mean = measure_mean(ifs)
    cov = measure_covariance(ifs)
    report = _scan(args, ifs)
    check = check_inertia_theorem(ifs, report)
    samples = []
    for g in ((1, 0), math.pi / 7, 1.0, 2.5):
        value = inertia_form(cov, g)
        samples.append({"gamma": 0.0 if isinstance(g, tuple) else g, **_scalar(value)})
    doc = {
        "mean": [_scalar(x) for x in mean],
        "cov": [[_scalar(x) for x in row] for row in cov],
        "inertia_samples": samples,
        "theorem_check": check.to_dict(),
    }
    _emit(_dump(doc), args.out)
    return OK


def cmd_witness(args):
    ifs = load_ifs(args.input)
    if not args.polygon:
        raise UsageError("witness needs --polygon")
    try:
        with open(args.polygon, encoding="utf-8") as fh:
            poly = parse_polygon(fh.read())
    except OSError as exc:
        raise WitnessError(f"cannot read {args.polygon}: {exc.strerror}") from None
    d = _direction(args)
    if args.all_lines == (d is not None):
        raise UsageError("witness needs exactly one of --slope/--vertical or --all-lines")
    if args.all_lines:
        result = check_every_line_witness(poly, ifs)
    else:
        result = check_theta_witness(poly, ifs, d)
    doc = witness_report(result)
    if d is not None:
        doc["direction"] = d.label()
    _emit(_dump(doc), args.out)
    return OK


def cmd_dimension(args):
    ifs = load_ifs(args.input)
    s = similarity_dimension(ifs)
    ssc = certify_ssc(ifs)
    if isinstance(ssc, Separated):
        ssc_doc = {"verdict": "separated", "min_gap": ssc.min_gap, "depth": ssc.depth}
    elif isinstance(ssc, NotSeparated):
        ssc_doc = {"verdict": "not-separated", "pair": list(ssc.pair),
                   "point": [format_scalar(c) for c in ssc.point]}
    else:
        ssc_doc = {"verdict": "undecided", "depth": ssc.depth}
    group = rotation_group(ifs)
    order = None if isinstance(group, ExceedsCap) else group.order
    doc = {"dimension": _scalar(s), "ssc": ssc_doc, "rotation_group_order": order,
           "rotation_group": "infinite (exceeds cap)" if order is None else "finite"}
    _emit(_dump(doc), args.out)
    return OK


def cmd_render(args):
    ifs = load_ifs(args.input)
    d = _direction(args)
    if d is not None:
        depth = args.max_depth if args.max_depth_given else 3
        svg = render_projection_cover(ifs, d, depth, points=args.points, seed=args.seed)
        target = args.svg or (args.out if args.out and args.out.endswith(".svg") else None)
        _emit(svg, target)
        if args.out and args.out != target:
            pts = attractor_points(ifs, 12, args.points or 2000, args.seed)
            _emit(points_csv(pts), args.out)
        return OK
    pts = attractor_points(ifs, 12, args.points or 2000, args.seed)
    if args.svg:
        _emit(render_points(pts, ifs.name or "attractor"), args.svg)
    if args.out and args.out.endswith(".svg"):
        _emit(render_points(pts, ifs.name or "attractor"), args.out)
    elif args.out or not args.svg:
        _emit(points_csv(pts), args.out)
    return OK


def cmd_example(args):
    try:
        info = ex.build_example(args.id)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    if args.emit:
        _emit(serialize_ifs(info.ifs), args.out)
        return OK
    doc = {
        "id": args.id,
        "description": info.description,
        "expected_count": info.expected_count,
        "expected_slopes": list(info.expected_slopes),
        "expected_lengths_sq": list(info.expected_lengths_sq),
        "expected_covariance": list(info.expected_covariance) if info.expected_covariance else None,
        "shortcut": info.shortcut,
        "notes": info.notes,
    }
    _emit(_dump(doc), args.out)
    return OK


def _positive_float(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def _positive_int(text):
    try:
        x = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if x < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return x


def _seed(text):
    try:
        x = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= x < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return x


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ssproj", description="Interval projections of planar self-similar sets.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, scan=False, direction=False):
        sp.add_argument("input", help="IFS document path or built-in example id")
        sp.add_argument("--out", help="write the main output here instead of standard output")
        sp.add_argument("--max-depth", type=_positive_int, default=None)
        if scan:
            sp.add_argument("--residue", type=_positive_float, default=1e-3)
            sp.add_argument("--budget", type=_positive_int, default=20000)
        if direction:
            sp.add_argument("--slope", help="direction x + t*y with t = p/q")
            sp.add_argument("--vertical", action="store_true")

    a = sub.add_parser("analyze", help="enumerate interval projections")
    common(a, scan=True)
    a.add_argument("--svg", help="also write the angle diagram")
    a.set_defaults(func=cmd_analyze)

    pr = sub.add_parser("project", help="decide one direction")
    common(pr, direction=True)
    pr.set_defaults(func=cmd_project)

    m = sub.add_parser("moments", help="mean, covariance and the inertia identity")
    common(m, scan=True)
    m.set_defaults(func=cmd_moments)

    w = sub.add_parser("witness", help="check a convex polygon witness")
    common(w, direction=True)
    w.add_argument("--polygon")
    w.add_argument("--all-lines", action="store_true")
    w.set_defaults(func=cmd_witness)

    d = sub.add_parser("dimension", help="similarity dimension, separation, rotation group")
    common(d)
    d.set_defaults(func=cmd_dimension)

    r = sub.add_parser("render", help="point cloud and projection cover figures")
    common(r, direction=True)
    r.add_argument("--points", type=_positive_int, default=None)
    r.add_argument("--seed", type=_seed, default=0)
    r.add_argument("--svg")
    r.set_defaults(func=cmd_render)

    e = sub.add_parser("example", help="built-in example systems")
    e.add_argument("id")
    e.add_argument("--emit", action="store_true", help="write the IFS document")
    e.add_argument("--out")
    e.set_defaults(func=cmd_example)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return USAGE
    if hasattr(args, "max_depth"):
        args.max_depth_given = args.max_depth is not None
        if args.max_depth is None:
            args.max_depth = 12
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"ssproj: error: {exc}\n")
        return USAGE
    except (IfsError, WitnessError, InfiniteGroupError, ValueError) as exc:
        sys.stderr.write(f"ssproj: invalid input: {exc}\n")
        return INVALID


if __name__ == "__main__":
    raise SystemExit(main())
