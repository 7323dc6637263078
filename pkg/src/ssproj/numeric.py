"""Scalar helpers shared by the exact (Fraction) and approximate (float) paths.

Every routine in the package is written against plain Python numbers: a value
is *exact* when it is an ``int`` or ``Fraction`` and *approximate* when it is a
``float``.  Mixed arithmetic promotes to float, which is the intended
behaviour: one float input makes the whole computation approximate.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

# relative tolerance used when float values are compared for equality
FLOAT_TOL = 1e-10
# ulps subtracted/added when a float bound has to be rounded outward
SAFETY_ULPS = 4


def is_exact(x) -> bool:
    return isinstance(x, Rational)


def all_exact(values) -> bool:
    return all(is_exact(v) for v in values)


def parse_number(text, exact: bool = True):
    """Parse ``"p/q"``, ``"0.25"``, ints or floats.

    Strings are read exactly as Fractions; JSON floats stay floats.
    """
    if isinstance(text, bool):
        raise ValueError(f"not a number: {text!r}")
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, float):
        if not math.isfinite(text):
            raise ValueError(f"non-finite number: {text!r}")
        return text
    if not isinstance(text, str):
        raise ValueError(f"not a number: {text!r}")
    s = text.strip()
    try:
        value = Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed number: {text!r}") from exc
    return value if exact else float(value)


def format_scalar(x) -> str:
    """Exact values as ``p/q`` (or an integer), floats via ``repr``."""
    if is_exact(x):
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return repr(float(x))


def to_float(x) -> float:
    return float(x)


def round_down(x: float, ulps: int = SAFETY_ULPS) -> float:
    x = float(x)
    return x - ulps * math.ulp(x)


def round_up(x: float, ulps: int = SAFETY_ULPS) -> float:
    x = float(x)
    return x + ulps * math.ulp(x)


def float_down(x) -> float:
    """Largest convenient float not above ``x`` (exact for Fractions)."""
    if is_exact(x):
        f = float(x)
        return f if Fraction(f) <= x else math.nextafter(f, -math.inf)
    return round_down(x)


def float_up(x) -> float:
    if is_exact(x):
        f = float(x)
        return f if Fraction(f) >= x else math.nextafter(f, math.inf)
    return round_up(x)


def sqrt_up(x) -> float:
    """Upper bound for sqrt(x), x >= 0."""
    if x <= 0:
        return 0.0
    return round_up(math.sqrt(float_up(x)))


def sqrt_down(x) -> float:
    if x <= 0:
        return 0.0
    return max(0.0, round_down(math.sqrt(float_down(x))))


def close(a, b, scale=1.0, tol: float = FLOAT_TOL) -> bool:
    """Equality test: exact for rationals, relative tolerance otherwise."""
    if is_exact(a) and is_exact(b):
        return a == b
    return abs(float(a) - float(b)) <= tol * max(1.0, abs(float(scale)))


def solve_linear(a, b):
    """Solve ``a x = b`` by Gaussian elimination.

    Works for Fraction matrices (exact, any nonzero pivot) and float matrices
    (partial pivoting).  Raises ``ValueError`` on a singular system.
    """
    n = len(a)
    m = [list(row) + [rhs] for row, rhs in zip(a, b)]
    exact = all(all_exact(row) for row in m)
    scale = max((abs(float(v)) for row in a for v in row), default=0.0)
    for col in range(n):
        if exact:
            piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        else:
            piv = max(range(col, n), key=lambda r: abs(m[r][col]))
            if abs(m[piv][col]) <= 1e-14 * max(scale, 1e-300):
                piv = None
        if piv is None:
            raise ValueError("singular linear system")
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col] / p
                row_r, row_c = m[r], m[col]
                for k in range(col, n + 1):
                    row_r[k] -= f * row_c[k]
    return [m[i][n] / m[i][i] for i in range(n)]


def rational_near(x: float, max_denominator: int = 10**6) -> Fraction:
    return Fraction(x).limit_denominator(max_denominator)
