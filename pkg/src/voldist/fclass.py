"""Distortion-function classes up to the coarse equivalence

    f <= g  iff  f(n) <= C g(Cn + C) + Cn + C  for some C > 0,

with symbolic comparison, composition and numeric evaluation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .errors import InvalidInput
from .interval import RatInterval

Exponent = Union[Fraction, RatInterval]


class Relation(enum.Enum):
    PRECEDES = "precedes"
    EQUIVALENT = "equivalent"
    DOMINATES = "dominates"
    INCOMPARABLE = "incomparable-at-precision"

    def flip(self) -> "Relation":
        if self is Relation.PRECEDES:
            return Relation.DOMINATES
        if self is Relation.DOMINATES:
            return Relation.PRECEDES
        return self


@dataclass(frozen=True)
class Power:
    """n^q with q an exact rational or a certified interval."""

    q: Exponent

    def __post_init__(self):
        q = self.q
        if isinstance(q, RatInterval):
            if q.is_exact:
                q = q.lo
        else:
            q = Fraction(q)
        object.__setattr__(self, "q", q)

    @property
    def exact(self) -> bool:
        return isinstance(self.q, Fraction)

    def interval(self) -> RatInterval:
        return self.q if isinstance(self.q, RatInterval) else RatInterval.point(self.q)

    def approx(self) -> float:
        return float(self.q)


@dataclass(frozen=True)
class PowerOverW:
    """(n^k / W(n))^{1/(k-1)}."""

    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise InvalidInput("PowerOverW needs an integer k >= 2")

    @property
    def threshold(self) -> Fraction:
        return Fraction(self.k, self.k - 1)


@dataclass(frozen=True)
class LinTimesExp:
    """n * m^n; use lin_times_exp() so that m = 1 collapses to linear."""

    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise InvalidInput("LinTimesExp needs an integer m >= 1")


@dataclass(frozen=True)
class Unknown:
    note: str = ""


FnClass = Union[Power, PowerOverW, LinTimesExp, Unknown]

LINEAR = Power(Fraction(1))


def lin_times_exp(m: int) -> FnClass:
    return LINEAR if m == 1 else LinTimesExp(m)


def normalize(f: FnClass) -> FnClass:
    if isinstance(f, LinTimesExp) and f.m == 1:
        return LINEAR
    return f


def dehn_class_zk(k: int) -> Power:
    """Top-dimensional Dehn function class of Z^k."""
    if k < 2:
        raise InvalidInput("k must be at least 2")
    return Power(Fraction(k, k - 1))


def _cmp_intervals(a: RatInterval, b: RatInterval) -> Relation:
    if a == b:
        return Relation.EQUIVALENT
    if a.hi < b.lo:
        return Relation.PRECEDES
    if a.lo > b.hi:
        return Relation.DOMINATES
    return Relation.INCOMPARABLE


def _power_vs_w(p: Power, w: PowerOverW) -> Relation:
    # n^q <= PowerOverW(k) iff q < k/(k-1); PowerOverW(k) <= n^q iff q >= k/(k-1)
    t = w.threshold
    iv = p.interval()
    if iv.hi < t:
        return Relation.PRECEDES
    if iv.lo >= t:
        return Relation.DOMINATES
    return Relation.INCOMPARABLE


def compare(f: FnClass, g: FnClass) -> Relation:
    f, g = normalize(f), normalize(g)
    if isinstance(f, Unknown) or isinstance(g, Unknown):
        raise InvalidInput("cannot compare an unknown class")
    if isinstance(f, LinTimesExp) or isinstance(g, LinTimesExp):
        if isinstance(f, LinTimesExp) and isinstance(g, LinTimesExp):
            # m^n <= (m')^{Cn} for a suitable C, so all bases >= 2 are equivalent
            return Relation.EQUIVALENT
        return Relation.DOMINATES if isinstance(f, LinTimesExp) else Relation.PRECEDES
    if isinstance(f, Power) and isinstance(g, Power):
        return _cmp_intervals(f.interval(), g.interval())
    if isinstance(f, Power):
        return _power_vs_w(f, g)
    if isinstance(g, Power):
        return _power_vs_w(g, f).flip()
    if f.k == g.k:
        return Relation.EQUIVALENT
    # a larger threshold k/(k-1) means a larger class
    return Relation.PRECEDES if f.threshold < g.threshold else Relation.DOMINATES


def equivalent(f: FnClass, g: FnClass) -> bool:
    return compare(f, g) is Relation.EQUIVALENT


def compose(f: FnClass, g: FnClass) -> FnClass:
    """The class of f o g."""
    f, g = normalize(f), normalize(g)
    if f == LINEAR:
        return g
    if g == LINEAR:
        return f
    if isinstance(f, Power) and isinstance(g, Power):
        if f.exact and g.exact:
            return Power(f.q * g.q)
        return Power(f.interval() * g.interval())
    return Unknown("composition is only supported between power classes")


def lambert_w(x: float, tol: float = 1e-14) -> float:
    """Principal branch of W by Halley iteration started at log(1 + x)."""
    if tol <= 0:
        raise InvalidInput("tol must be positive")
    x = float(x)
    if x < 0 or math.isnan(x):
        raise InvalidInput("lambert_w is only defined here for x >= 0")
    if x == 0:
        return 0.0
    w = math.log1p(x)
    for _ in range(200):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= tol * x:
            return w
        step = f / (ew * (w + 1) - (w + 2) * f / (2 * w + 2))
        w -= step
        if abs(step) <= 4 * math.ulp(w):
            return w
    return w


def log_evaluate(f: FnClass, n: float) -> float:
    """Natural log of f(n)."""
    f = normalize(f)
    n = float(n)
    if n < 1 or math.isnan(n):
        raise InvalidInput("classes are evaluated at n >= 1 only")
    ln = math.log(n)
    if isinstance(f, Power):
        return f.approx() * ln
    if isinstance(f, PowerOverW):
        return (f.k * ln - math.log(lambert_w(n))) / (f.k - 1)
    if isinstance(f, LinTimesExp):
        return ln + n * math.log(f.m)
    raise InvalidInput("cannot evaluate an unknown class")


def evaluate(f: FnClass, n: float, tol: float = 1e-14) -> float:
    """f(n) as a float; returns inf instead of overflowing."""
    f = normalize(f)
    n = float(n)
    if n < 1 or math.isnan(n):
        raise InvalidInput("classes are evaluated at n >= 1 only")
    if isinstance(f, Power) and f.exact and f.q.denominator == 1:
        try:
            return float(n ** int(f.q))
        except OverflowError:
            return math.inf
    if isinstance(f, LinTimesExp):
        try:
            return n * float(f.m) ** n
        except OverflowError:
            return math.inf
    if isinstance(f, PowerOverW):
        if f.k == 2:
            return n * n / lambert_w(n, tol)
    lv = log_evaluate(f, n)
    if lv > 709.0:
        return math.inf
    return math.exp(lv)


def _frac_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{{{q.numerator}/{q.denominator}}}"


def render(f: FnClass) -> str:
    f = normalize(f)
    if isinstance(f, Power):
        if f.exact:
            return "n" if f.q == 1 else f"n^{_frac_str(f.q)}"
        iv = f.q
        rad = float(iv.radius)
        rad_s = f"{rad:.0e}" if rad > 0 else "0"
        return f"n^{{{float(iv.mid):.10g}(±{rad_s})}}"
    if isinstance(f, PowerOverW):
        if f.k == 2:
            return "n^2/W(n)"
        return f"(n^{f.k}/W(n))^{{1/{f.k - 1}}}"
    if isinstance(f, LinTimesExp):
        return f"n*{f.m}^n"
    return "unknown"


def to_dict(f: FnClass) -> dict:
    f = normalize(f)
    if isinstance(f, Power):
        if f.exact:
            return {"kind": "power", "exponent": str(f.q), "text": render(f)}
        return {
            "kind": "power",
            "exponent_interval": [str(f.q.lo), str(f.q.hi)],
            "exponent_approx": float(f.q.mid),
            "text": render(f),
        }
    if isinstance(f, PowerOverW):
        return {"kind": "power_over_w", "k": f.k, "text": render(f)}
    if isinstance(f, LinTimesExp):
        return {"kind": "lin_times_exp", "m": f.m, "text": render(f)}
    return {"kind": "unknown", "note": f.note, "text": render(f)}


PROVED, CONJECTURAL = "proved", "conjectural"


@dataclass(frozen=True)
class DistortionVerdict:
    lower: FnClass
    upper: FnClass
    sharp: bool
    rigor: str = PROVED
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.rigor not in (PROVED, CONJECTURAL):
            raise InvalidInput(f"unknown rigor {self.rigor!r}")
        if self.sharp and compare(self.lower, self.upper) is not Relation.EQUIVALENT:
            raise InvalidInput("a sharp verdict needs equivalent bounds")

    @classmethod
    def exact(cls, f: FnClass, notes=(), rigor: str = PROVED) -> "DistortionVerdict":
        return cls(f, f, True, rigor, tuple(notes))

    def to_dict(self) -> dict:
        return {
            "lower": to_dict(self.lower),
            "upper": to_dict(self.upper),
            "sharp": self.sharp,
            "rigor": self.rigor,
            "notes": list(self.notes),
        }
