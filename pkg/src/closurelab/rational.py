"""Exact rational arithmetic: the numeric substrate for every solver module.

``fractions.Fraction`` already provides canonical arbitrary-precision
rationals (gcd-reduced, positive denominator, immutable, totally ordered),
so it is used directly as the ``Rational`` type.  This module adds the
integer rounding and the "p/q" text encoding shared by the instance file
format and the CSV output.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)
TWO = Fraction(2)

_RATIONAL_RE = re.compile(r"^[+-]?\d+(?:/\d+)?$")


def floor(q: Rational | int) -> int:
    """Greatest integer <= q, exactly."""
    return math.floor(q)


def ceil(q: Rational | int) -> int:
    """Least integer >= q, exactly."""
    return math.ceil(q)


def parse_rational(text: str) -> Fraction:
    """Parse the "p/q" encoding ("p" alone means denominator 1).

    Decimal or exponent notation is rejected: the file format is exact.
    """
    s = text.strip()
    if not _RATIONAL_RE.match(s):
        raise ValueError(f"not a p/q rational: {text!r}")
    if "/" in s:
        num, den = s.split("/")
        if int(den) == 0:
            raise ValueError(f"zero denominator: {text!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(s))


def format_rational(q: Rational | int) -> str:
    """Render as "p/q", or "p" when the denominator is 1."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"
