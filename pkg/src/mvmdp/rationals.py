"""Exact rational arithmetic backend.

Everything numeric in this package is an exact rational. `Rat` is gmpy2's mpq
when available (about an order of magnitude faster) and fractions.Fraction
otherwise; the two interoperate and agree on normalization, ordering, equality
and hashing, so either backend yields identical results.
"""

from __future__ import annotations

import math
from fractions import Fraction

try:
    from gmpy2 import mpq as Rat
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    Rat = Fraction

ZERO = Rat(0)
ONE = Rat(1)


def rat(value, den=None):
    """Coerce to Rat. Accepts ints, Rat/Fraction, 'p/q' strings, [num, den] pairs."""
    if den is not None:
        return Rat(value) / Rat(den)
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"rational pair must have two entries, got {value!r}")
        return Rat(int(value[0])) / Rat(int(value[1]))
    if isinstance(value, float):
        raise TypeError(f"refusing float {value!r}; pass an exact rational")
    if isinstance(value, str):
        return Rat(Fraction(value.strip()))
    return Rat(value)


def rat_str(value) -> str:
    """Render as 'p' or 'p/q'."""
    value = Rat(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def rat_pair(value) -> list:
    """[numerator, denominator] with positive denominator, for JSON."""
    value = Rat(value)
    return [int(value.numerator), int(value.denominator)]


def is_integral(value) -> bool:
    return Rat(value).denominator == 1


def floor_multiple(value, step):
    """Largest integer multiple of step that is <= value (step > 0)."""
    step = Rat(step)
    if step <= 0:
        raise ValueError("step must be positive")
    return Rat(math.floor(Rat(value) / step)) * step


def rationalize_float(x: float, max_denominator: int = 10**6):
    """Nearest rational with bounded denominator (continued-fraction truncation)."""
    return Rat(Fraction(x).limit_denominator(max_denominator))
