"""Exact scalars: rationals (gmpy2.mpq) and Gaussian rationals over Q(i).

Real-valued results are always returned as plain ``mpq`` so that the common
case stays on the fast path; ``GaussQ`` only appears when an imaginary part
is actually present.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Number
from typing import Union

import gmpy2
from gmpy2 import mpq

Rational = type(mpq(0))


def Q(value, den=None) -> "Rational":
    """Coerce an int, str, Fraction or mpq to ``mpq``."""
    if den is not None:
        return mpq(value, den)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, float):
        raise TypeError("refusing to coerce a float to an exact rational")
    return mpq(value)


class GaussQ:
    """A Gaussian rational ``re + im*i`` with a nonzero imaginary part."""

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = Q(re)
        self.im = Q(im)

    @staticmethod
    def make(re, im):
        if im == 0:
            return Q(re)
        return GaussQ(re, im)

    def __repr__(self):
        return f"GaussQ({self.re}, {self.im})"

    def __str__(self):
        return format_scalar(self)

    def __eq__(self, other):
        re, im = parts(other)
        return self.re == re and self.im == im

    def __hash__(self):
        return hash((self.re, self.im))

    def __neg__(self):
        return GaussQ(-self.re, -self.im)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, float):
            return complex(self) + other
        re, im = parts(other)
        return GaussQ.make(self.re + re, self.im + im)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, float):
            return complex(self) - other
        re, im = parts(other)
        return GaussQ.make(self.re - re, self.im - im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, float):
            return complex(self) * other
        re, im = parts(other)
        return GaussQ.make(self.re * re - self.im * im, self.re * im + self.im * re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * inverse(other)

    def __rtruediv__(self, other):
        return inverse(self) * other

    def __pow__(self, n: int):
        if n < 0:
            return inverse(self) ** (-n)
        out = Q(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self):
        return GaussQ(self.re, -self.im)


Scalar = Union[Rational, GaussQ, float, complex]

I = GaussQ(0, 1)


def parts(x):
    """Real and imaginary parts of an exact scalar as ``mpq``."""
    if isinstance(x, GaussQ):
        return x.re, x.im
    if isinstance(x, (float, complex)):
        raise TypeError("inexact scalar in exact context")
    return Q(x), mpq(0)


def is_exact(x) -> bool:
    return not isinstance(x, (float, complex))


def inverse(x):
    if isinstance(x, GaussQ):
        n = x.re * x.re + x.im * x.im
        return GaussQ.make(x.re / n, -x.im / n)
    if isinstance(x, (float, complex)):
        return 1 / x
    if x == 0:
        raise ZeroDivisionError("inverse of zero")
    return 1 / Q(x)


def conj(x):
    if isinstance(x, GaussQ):
        return x.conjugate()
    if isinstance(x, complex):
        return x.conjugate()
    return x


def to_complex(x) -> complex:
    if isinstance(x, GaussQ):
        return complex(x)
    return complex(float(x.real if isinstance(x, complex) else x))


def to_float(x) -> float:
    if isinstance(x, GaussQ):
        raise ValueError(f"non-real scalar {x}")
    if isinstance(x, complex):
        if x.imag != 0:
            raise ValueError(f"non-real scalar {x}")
        return x.real
    return float(x)


def rational_sqrt(x):
    """Exact square root of a nonnegative rational, or None."""
    x = Q(x)
    if x < 0:
        return None
    n, d = gmpy2.isqrt_rem(x.numerator), gmpy2.isqrt_rem(x.denominator)
    if n[1] or d[1]:
        return None
    return mpq(n[0], d[0])


def exact_sqrt(x):
    """Exact square root in Q(i), principal branch (re > 0, or re == 0 and im >= 0).

    Returns None when the root is not a Gaussian rational.
    """
    re, im = parts(x)
    if im == 0:
        if re >= 0:
            return rational_sqrt(re)
        r = rational_sqrt(-re)
        return None if r is None else GaussQ(0, r)
    modulus = rational_sqrt(re * re + im * im)
    if modulus is None:
        return None
    a = rational_sqrt((re + modulus) / 2)
    if a is None or a == 0:
        return None
    b = im / (2 * a)
    return GaussQ.make(a, b)


def format_scalar(x) -> str:
    """Canonical text: ``3/2``, ``-1``, ``(1/2+3*I)``, ``(2*I)``."""
    if isinstance(x, GaussQ):
        re, im = x.re, x.im
        im_txt = "I" if im == 1 else ("-I" if im == -1 else f"{_q(im)}*I")
        if re == 0:
            return f"({im_txt})"
        sign = "" if im_txt.startswith("-") else "+"
        return f"({_q(re)}{sign}{im_txt})"
    if isinstance(x, (float, complex)):
        return repr(x)
    return _q(Q(x))


def _q(x) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def to_json_scalar(x):
    """JSON-friendly form: strings for exact values, numbers for floats."""
    if isinstance(x, float):
        return x
    if isinstance(x, complex):
        return [x.real, x.imag]
    return format_scalar(x).strip("()")


def from_text(text: str):
    """Parse ``a``, ``a/b`` into an exact rational."""
    return Q(text.strip())


def as_scalar(x):
    """Normalize ints, Fractions and GaussQ-with-zero-imaginary to the canonical type."""
    if isinstance(x, GaussQ):
        return GaussQ.make(x.re, x.im)
    if isinstance(x, (float, complex)):
        return x
    if isinstance(x, Number) or isinstance(x, (str, Fraction)):
        return Q(x)
    return Q(x)
