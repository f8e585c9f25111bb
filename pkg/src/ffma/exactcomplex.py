"""Exact complex constellation points with rational real/imaginary parts.

Complex-field sum patterns must be compared exactly, so points are kept
as Fraction pairs rather than floats.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction


@dataclass(frozen=True, order=True)
class ExactComplex:
    re: Fraction
    im: Fraction

    def __add__(self, other: "ExactComplex") -> "ExactComplex":
        return ExactComplex(self.re + other.re, self.im + other.im)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


ZERO = ExactComplex(Fraction(0), Fraction(0))

_TERM = re.compile(r"([+-]?)(\d*\.\d+|\d+(?:/\d+)?)?(i?)")


def parse_complex(text: str | int | float | ExactComplex) -> ExactComplex:
    """Parse strings like '0', '+1', '-1', '+1i', '0.5-0.5i', '3/2i'."""
    if isinstance(text, ExactComplex):
        return text
    if isinstance(text, (int, Fraction)):
        return ExactComplex(Fraction(text), Fraction(0))
    if isinstance(text, float):
        return ExactComplex(Fraction(text).limit_denominator(10**6), Fraction(0))
    s = str(text).replace(" ", "")
    if not s:
        raise ValueError("empty complex literal")
    re_part = Fraction(0)
    im_part = Fraction(0)
    pos = 0
    while pos < len(s):
        match = _TERM.match(s, pos)
        if not match or match.end() == pos:
            raise ValueError(f"cannot parse complex literal {text!r}")
        sign, mag, unit = match.groups()
        if mag is None and not unit:
            raise ValueError(f"cannot parse complex literal {text!r}")
        if mag is None:
            value = Fraction(1)
        elif "." in mag:
            value = Fraction(Decimal(mag))
        else:
            value = Fraction(mag)
        if sign == "-":
            value = -value
        if unit:
            im_part += value
        else:
            re_part += value
        pos = match.end()
    return ExactComplex(re_part, im_part)
