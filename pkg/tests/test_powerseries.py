from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flapinv.errors import DomainError, VariableMismatch
from flapinv.powerseries import TruncatedSeries as T
from flapinv.powerseries import parity_split, series_arith, series_eval, series_partial

V = ("x", "y", "lam")
ORDER = 6


def P(text, order=ORDER, variables=V):
    return T.parse(text, variables, order)


@st.composite
def series(draw, order=ORDER):
    n = draw(st.integers(0, 6))
    terms = {}
    for _ in range(n):
        exp = tuple(draw(st.integers(0, 3)) for _ in V)
        terms[exp] = Fraction(draw(st.integers(-9, 9)), draw(st.integers(1, 5)))
    return T(V, order, terms)


# -- examples ------------------------------------------------------------------------


def test_arith_examples():
    assert series_arith(P("x"), P("y"), "mul") == P("x*y")
    assert series_arith(P("x^2"), T.zero(V, ORDER), "add") == P("x^2")
    sq = P("1+y", order=1) * P("1+y", order=1)
    assert sq == P("1+2*y", order=1)
    assert series_arith(P("x"), Fraction(1, 3), "scale") == P("x/3")


def test_partial_examples():
    assert series_partial(P("x^2*y"), "x") == P("2*x*y", ORDER - 1)
    assert series_partial(P("lam"), "y").is_zero()
    assert series_partial(P("x^3 - 3*x*y^2"), "y") == P("-6*x*y", ORDER - 1)
    assert series_partial(P("x"), "x").order == ORDER - 1
    assert series_partial(P("1", order=0), "x").order == 0


def test_parity_examples():
    assert parity_split(P("x + x^2*y"), "x") == (P("x^2*y"), P("x"))
    assert parity_split(P("y^3"), "x") == (P("y^3"), T.zero(V, ORDER))
    assert parity_split(P("x*y + x^3 + y"), "x") == (P("y"), P("x*y + x^3"))


def test_eval_examples():
    assert series_eval(P("x^2 + y^2"), {"x": 1, "y": 2, "lam": 0}) == 5
    assert series_eval(T.zero(V, ORDER), {"x": 7, "y": 1, "lam": 2}) == 0
    assert series_eval(P("x^2 - y^3 + lam*y"), {"x": 0, "y": 1, "lam": 3}) == 2


def test_aliases_and_parse():
    assert P("lambda*y") == P("lam*y") == P("l*y") == P("λ*y")
    with pytest.raises(DomainError):
        P("sqrt(2)*x")
    with pytest.raises(DomainError):
        P("x +* y")


def test_truncation_and_canonical_form():
    s = P("x^7 + y - y")
    assert s.is_zero()
    assert P("x^3*y^3 + x", order=5) == P("x", order=5)
    assert all(sum(e) <= 5 for e in P("(1+x+y)^9", order=5).coefficients)


def test_errors():
    a = T.parse("x", ("x", "y"), 4)
    with pytest.raises(VariableMismatch):
        a + P("x")
    with pytest.raises(VariableMismatch):
        a.partial("lam")
    with pytest.raises(VariableMismatch):
        a.parity_split("z")
    with pytest.raises((DomainError, VariableMismatch)):
        series_eval(P("x + y"), {"x": 1})


def test_json_roundtrip_is_deterministic():
    s = P("3/7*x^2*y - lam + 1")
    text = s.to_json()
    assert T.from_json(text) == s
    assert T.from_json(text).to_json() == text
    obj = s.to_json_obj()
    assert obj["vars"] == list(V) and obj["order"] == ORDER
    assert [t["exp"] for t in obj["terms"]] == sorted(t["exp"] for t in obj["terms"])


def test_callable_matches_exact_evaluation():
    s = P("1 + x*y - 2/3*lam^2*x + y^5")
    f = s.to_callable()
    pt = {"x": Fraction(1, 3), "y": Fraction(-2, 5), "lam": Fraction(3, 4)}
    assert f(1 / 3, -0.4, 0.75) == pytest.approx(float(s.evaluate(pt)), abs=1e-15)


# -- properties ----------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(series(), series(), series())
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == T.zero(V, ORDER)


@settings(max_examples=60, deadline=None)
@given(series())
def test_parity_split_idempotent(a):
    even, odd = parity_split(a, "x")
    assert even + odd == a
    assert parity_split(even, "x") == (even, T.zero(V, ORDER))
    assert parity_split(odd, "x") == (T.zero(V, ORDER), odd)


@settings(max_examples=60, deadline=None)
@given(series(), series(), st.sampled_from(V))
def test_partial_linear_and_leibniz(a, b, var):
    assert series_partial(a + b, var) == series_partial(a, var) + series_partial(b, var)
    # within truncation: compare up to degree ORDER - 1
    lhs = series_partial(a * b, var)
    rhs = series_partial(a, var) * b.truncate(ORDER - 1) + a.truncate(ORDER - 1) * series_partial(b, var)
    assert lhs == rhs.truncate(ORDER - 1)
