from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scat2.series import (
    CutoffMismatch, LoopTransport, NonUnitSeries, Trunc2Series, series_coeff, series_mul,
    subst_scale, unit_pow, univariate_pow,
)


def S(D, **terms):
    # S(3, x1y0=2) -> 2*zeta1
    out = {}
    for name, v in terms.items():
        p, q = name[1:].split("y")
        out[(int(p), int(q))] = v
    return Trunc2Series(D, out)


ONE = {(0, 0): 1}


def test_mul_examples():
    assert series_mul(S(2, x0y0=1, x1y0=1), S(2, x0y0=1, x0y1=1)) == S(2, x0y0=1, x1y0=1, x0y1=1, x1y1=1)
    s = S(2, x0y0=3, x1y1=Fraction(1, 2))
    assert s * Trunc2Series.one(2) == s
    assert series_mul(S(2, x0y0=1, x1y0=1), S(2, x0y0=1, x1y0=-1, x2y0=1)) == Trunc2Series.one(2)


def test_cutoff_mismatch():
    with pytest.raises(CutoffMismatch):
        Trunc2Series.one(2) * Trunc2Series.one(3)


def test_unit_pow_examples():
    assert unit_pow(S(3, x0y0=1, x1y0=1), -1) == S(3, x0y0=1, x1y0=-1, x2y0=1, x3y0=-1)
    assert unit_pow(S(3, x0y0=1, x1y0=5), 0) == Trunc2Series.one(3)
    assert unit_pow(S(4, x0y0=1, x1y1=1), 2) == S(4, x0y0=1, x1y1=2, x2y2=1)
    with pytest.raises(NonUnitSeries):
        unit_pow(S(3, x0y0=2), 2)


def test_subst_scale_examples():
    one = Trunc2Series.one(3)
    assert subst_scale(S(3, x1y0=1), S(3, x0y0=1, x0y1=1), one) == S(3, x1y0=1, x1y1=1)
    s = S(3, x0y0=2, x2y1=7)
    assert subst_scale(s, one, one) == s
    got = subst_scale(S(3, x1y1=1), S(3, x0y0=1, x1y0=1), S(3, x0y0=1, x0y1=1))
    assert got == S(3, x1y1=1, x2y1=1, x1y2=1)


def test_coeff_lookup():
    s = S(3, x0y0=1, x1y1=2)
    assert series_coeff(s, 1, 1) == 2
    assert series_coeff(Trunc2Series.one(3), 1, 0) == 0
    with pytest.raises(ValueError):
        series_coeff(s, 2, 2)


def test_truncation_and_zero_dropping():
    s = Trunc2Series(2, {(0, 0): 1, (3, 0): 5, (1, 0): 0})
    assert s.terms == ONE


def test_loop_transport_needs_units():
    with pytest.raises(NonUnitSeries):
        LoopTransport(Trunc2Series(2), Trunc2Series.one(2))


coef = st.fractions(min_value=-3, max_value=3, max_denominator=3)


@st.composite
def series(draw, D=None, unit=False):
    D = D if D is not None else draw(st.integers(1, 8))
    keys = [(p, q) for p in range(D + 1) for q in range(D + 1 - p)]
    terms = draw(st.dictionaries(st.sampled_from(keys), coef, max_size=6))
    if unit:
        terms[(0, 0)] = 1
    return Trunc2Series(D, terms)


@st.composite
def triples(draw):
    D = draw(st.integers(1, 8))
    return draw(series(D)), draw(series(D)), draw(series(D))


@settings(max_examples=60, deadline=None)
@given(triples())
def test_mul_commutative_associative(t):
    a, b, c = t
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)


@settings(max_examples=60, deadline=None)
@given(series(unit=True), st.integers(-6, 6))
def test_unit_pow_inverse(s, e):
    assert unit_pow(s, e) * unit_pow(s, -e) == Trunc2Series.one(s.cutoff)


@settings(max_examples=40, deadline=None)
@given(series(unit=True), st.integers(0, 4), st.integers(0, 4))
def test_unit_pow_adds_exponents(s, m, n):
    assert unit_pow(s, m) * unit_pow(s, n) == unit_pow(s, m + n)


@given(st.lists(coef, min_size=1, max_size=6), st.integers(-7, 7), st.integers(0, 8))
def test_univariate_pow_matches_series(tail, e, n):
    f = [1] + tail
    F = Trunc2Series(n, {(k, 0): v for k, v in enumerate(f)})
    want = unit_pow(F, e)
    got = univariate_pow(f, e, n)
    assert [series_coeff(want, k, 0) for k in range(n + 1)] == got
