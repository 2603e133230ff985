import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import lambertw

from voldist.errors import InvalidInput
from voldist.fclass import (
    LINEAR,
    DistortionVerdict,
    LinTimesExp,
    Power,
    PowerOverW,
    Relation,
    Unknown,
    compare,
    compose,
    dehn_class_zk,
    evaluate,
    lambert_w,
    lin_times_exp,
    log_evaluate,
    render,
    to_dict,
)
from voldist.interval import RatInterval

exps = st.fractions(min_value=1, max_value=4, max_denominator=12)
classes = st.one_of(
    exps.map(Power),
    st.integers(2, 6).map(PowerOverW),
    st.integers(2, 5).map(LinTimesExp),
)


def test_render():
    assert render(LINEAR) == "n"
    assert render(Power(2)) == "n^2"
    assert render(Power(Fraction(3, 2))) == "n^{3/2}"
    assert render(PowerOverW(2)) == "n^2/W(n)"
    assert render(PowerOverW(3)) == "(n^3/W(n))^{1/2}"
    assert render(LinTimesExp(3)) == "n*3^n"
    assert render(Unknown()) == "unknown"
    iv = RatInterval(Fraction(15644763825, 10**10), Fraction(15644763826, 10**10))
    assert render(Power(iv)).startswith("n^{1.564476383")


def test_lin_times_exp_normalizes():
    assert lin_times_exp(1) == LINEAR
    assert compare(LinTimesExp(1), LINEAR) is Relation.EQUIVALENT
    assert compare(LinTimesExp(2), LinTimesExp(7)) is Relation.EQUIVALENT
    assert compare(LinTimesExp(2), Power(100)) is Relation.DOMINATES


def test_compare_examples():
    assert compare(Power(2), Power(Fraction(3, 2))) is Relation.DOMINATES
    assert compare(PowerOverW(2), Power(2)) is Relation.PRECEDES
    assert compare(PowerOverW(2), Power(Fraction(19, 10))) is Relation.DOMINATES
    # n^2/W(n) dominates every n^q with q < 2 but not n^2
    assert compare(Power(Fraction(3, 2)), PowerOverW(3)) is Relation.DOMINATES
    assert compare(PowerOverW(3), PowerOverW(2)) is Relation.PRECEDES
    with pytest.raises(InvalidInput):
        compare(Unknown(), LINEAR)


def test_overlapping_intervals_are_incomparable():
    a = Power(RatInterval(Fraction(1), Fraction(3, 2)))
    b = Power(RatInterval(Fraction(5, 4), Fraction(2)))
    assert compare(a, b) is Relation.INCOMPARABLE


@given(classes, classes)
def test_compare_antisymmetric(f, g):
    assert compare(f, g) is compare(g, f).flip()


@given(classes, classes, classes)
def test_compare_transitive(f, g, h):
    le = (Relation.PRECEDES, Relation.EQUIVALENT)
    if compare(f, g) in le and compare(g, h) in le:
        assert compare(f, h) in le


@given(classes)
def test_compare_reflexive(f):
    assert compare(f, f) is Relation.EQUIVALENT


@settings(deadline=None)
@given(classes, classes)
def test_strict_order_visible_at_large_n(f, g):
    # a strict relation between distinct classes shows in the values once n is large
    if compare(f, g) is Relation.PRECEDES and not isinstance(g, LinTimesExp):
        n = 1e12
        assert log_evaluate(f, n) < log_evaluate(g, n) + 1e-9


@given(st.floats(min_value=0, max_value=1e300, allow_nan=False))
def test_lambert_round_trip(x):
    w = lambert_w(x)
    ref = float(lambertw(x).real)
    assert w == pytest.approx(ref, rel=1e-13, abs=1e-300)
    if x < 1e250:
        assert w * math.exp(w) == pytest.approx(x, rel=1e-12)


def test_lambert_bisection_oracle():
    for x in (0.5, 1.0, math.e, 10.0, 1e6):
        lo, hi = 0.0, max(1.0, math.log(x) + 1)
        for _ in range(200):
            mid = (lo + hi) / 2
            if mid * math.exp(mid) < x:
                lo = mid
            else:
                hi = mid
        assert lambert_w(x) == pytest.approx(lo, rel=1e-13)
    assert lambert_w(math.e) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(InvalidInput):
        lambert_w(-1)


def test_evaluate():
    assert evaluate(PowerOverW(2), math.e) == pytest.approx(math.e**2, abs=1e-9)
    assert evaluate(Power(2), 10) == 100
    assert evaluate(LinTimesExp(2), 10) == 10 * 2**10
    assert evaluate(LinTimesExp(3), 1e6) == math.inf
    assert evaluate(Power(Fraction(3, 2)), 4) == pytest.approx(8.0)
    with pytest.raises(InvalidInput):
        evaluate(Power(2), 0.5)


@given(st.integers(2, 6), st.floats(min_value=1, max_value=1e8))
def test_power_over_w_formula(k, n):
    expected = (n**k / float(lambertw(n).real)) ** (1 / (k - 1)) if n > 1 else None
    if expected is not None and math.isfinite(expected) and n > 1.01:
        assert evaluate(PowerOverW(k), n) == pytest.approx(expected, rel=1e-10)


@given(exps, exps, exps)
def test_compose_associative(a, b, c):
    f, g, h = Power(a), Power(b), Power(c)
    assert compose(compose(f, g), h) == compose(f, compose(g, h))
    assert compose(LINEAR, f) == f and compose(f, LINEAR) == f


def test_compose_unsupported():
    assert isinstance(compose(PowerOverW(2), Power(2)), Unknown)


def test_dehn_class():
    assert dehn_class_zk(2) == Power(2)
    assert dehn_class_zk(3) == Power(Fraction(3, 2))
    with pytest.raises(InvalidInput):
        dehn_class_zk(1)


def test_verdict_validation():
    with pytest.raises(InvalidInput):
        DistortionVerdict(LINEAR, Power(2), True)
    v = DistortionVerdict.exact(Power(2))
    d = v.to_dict()
    assert d["sharp"] and d["lower"]["text"] == "n^2"
    assert to_dict(PowerOverW(2))["kind"] == "power_over_w"


@pytest.mark.parametrize("x", [0.1, 0.5, 1, 2, 5])
def test_lambert_inverts_x_exp_x(x):
    assert abs(lambert_w(x * math.exp(x), 1e-14) - x) <= 10 * 1e-14 * max(1, x)


def test_spec_examples_misc():
    assert lambert_w(0) == 0
    assert lambert_w(1) == pytest.approx(0.5671432904097838, abs=1e-15)
    assert evaluate(LinTimesExp(2), 3) == 24
    assert dehn_class_zk(4) == Power(Fraction(4, 3))
    assert compose(Power(2), Power(Fraction(3, 2))) == Power(3)


@settings(deadline=None)
@given(classes, classes)
def test_numeric_sampling_respects_order(f, g):
    # f strictly below g: f(n) <= C g(Cn + C) + Cn + C with C = 8 on n = 2^10 .. 2^40
    if compare(f, g) is not Relation.PRECEDES:
        return
    C = 8.0
    for e in range(10, 41, 5):
        n = 2.0**e
        lhs = log_evaluate(f, n)
        rhs = math.log(C) + log_evaluate(g, C * n + C)
        assert lhs <= np.logaddexp(rhs, math.log(C * n + C)) + 1e-12
