"""Closed rational intervals and outward-rounded real functions on them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from mpmath import iv


@dataclass(frozen=True)
class RatInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = Fraction(self.lo), Fraction(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x) -> "RatInterval":
        return cls(Fraction(x), Fraction(x))

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def radius(self) -> Fraction:
        return (self.hi - self.lo) / 2

    def contains(self, x) -> bool:
        return self.lo <= Fraction(x) <= self.hi

    def overlaps(self, other: "RatInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __mul__(self, other):
        if not isinstance(other, RatInterval):
            other = RatInterval.point(other)
        c = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return RatInterval(min(c), max(c))

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, RatInterval):
            other = RatInterval.point(other)
        return RatInterval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __truediv__(self, other):
        if not isinstance(other, RatInterval):
            other = RatInterval.point(other)
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("interval division by an interval containing 0")
        return self * RatInterval(1 / other.hi, 1 / other.lo)

    def __pow__(self, k: int):
        out = RatInterval.point(1)
        for _ in range(k):
            out = out * self
        return out

    def cmp_scalar(self, x) -> int | None:
        """-1 / 0 / +1 if the whole interval is below / equal to / above x, else None."""
        x = Fraction(x)
        if self.hi < x:
            return -1
        if self.lo > x:
            return 1
        if self.is_exact and self.lo == x:
            return 0
        return None

    def __float__(self):
        return float(self.mid)

    def __str__(self):
        if self.is_exact:
            return str(self.lo)
        return f"[{float(self.lo):.12g}, {float(self.hi):.12g}]"


def mpf_to_fraction(t) -> Fraction:
    """Exact value of an mpmath mpf tuple (sign, man, exp, bc)."""
    sign, man, exp, _ = t
    v = Fraction(int(man)) * (Fraction(2) ** exp)
    return -v if sign else v


def _to_iv(x: RatInterval):
    # endpoints are rounded outward by mpmath's interval constructor
    a = iv.mpf(x.lo.numerator) / x.lo.denominator
    b = iv.mpf(x.hi.numerator) / x.hi.denominator
    return iv.mpf([a.a, b.b])


def _from_iv(v) -> RatInterval:
    a, b = v._mpi_
    return RatInterval(mpf_to_fraction(a), mpf_to_fraction(b))


def log_ratio(num: RatInterval, den: RatInterval, prec: int = 256) -> RatInterval:
    """Certified enclosure of log(num)/log(den); requires num > 0 and den > 1 or den < 1."""
    if num.lo <= 0 or den.lo <= 0:
        raise ValueError("logarithm of a non-positive interval")
    old = iv.prec
    iv.prec = prec + 20
    try:
        ln_den = iv.log(_to_iv(den))
        lo_b, hi_b = _from_iv(ln_den).lo, _from_iv(ln_den).hi
        if lo_b <= 0 <= hi_b:
            raise ZeroDivisionError("log of an interval containing 1 in the denominator")
        return _from_iv(iv.log(_to_iv(num)) / ln_den)
    finally:
        iv.prec = old


def sqrt_bounds(q: Fraction, bits: int = 256) -> tuple[Fraction, Fraction]:
    """Rational bounds lo <= sqrt(q) <= hi, about ``bits`` bits apart."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("sqrt of a negative number")
    if q == 0:
        return Fraction(0), Fraction(0)
    scale = 1 << (2 * bits)
    n = q.numerator * q.denominator * scale
    r = math.isqrt(n)
    denom = q.denominator * (1 << bits)
    lo = Fraction(r, denom)
    hi = lo if r * r == n else Fraction(r + 1, denom)
    return lo, hi
