import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flapinv.errors import DomainError, TruncationError, VariableMismatch
from flapinv.hamiltonians import ModelHamiltonian
from flapinv.moves import (
    Density,
    Transcript,
    apply_move,
    bracket,
    cusp_reduce,
    elliptic_reduce,
    growth_certificate,
    kill_odd_part,
    move_identity_defect,
    parabolic_c_recursion,
    reconstruct_from_c,
    replay,
)
from flapinv.powerseries import TruncatedSeries

XY = ("x", "y")
XYL = ("x", "y", "lam")


def S(text, variables=XY, order=12):
    return TruncatedSeries.parse(text, variables, order)


def D(text, variables=XY, order=12):
    return Density(S(text, variables, order))


def test_bracket_sign_convention():
    # {u, H} = u_x H_y - u_y H_x
    assert bracket(S("x"), "cusp") == S("-3*y^2")
    assert bracket(S("y"), "elliptic") == S("-2*x")


def test_apply_move_examples():
    rec = apply_move(D("x^2"), S("-x*y/2"), "elliptic")
    assert rec.after.g == S("y^2")
    assert apply_move(D("y^2"), S("-x/3"), "cusp").after.g.is_zero()
    for model in ModelHamiltonian:
        variables = XYL if model is ModelHamiltonian.CuspFamily else XY
        d = D("1 + x*y", variables)
        rec = apply_move(d, TruncatedSeries.zero(variables, 12), model)
        assert rec.after.g == d.g
        assert move_identity_defect(rec).is_zero()
    with pytest.raises(VariableMismatch):
        apply_move(D("x"), S("x", XYL), "cusp")


def test_move_record_json():
    rec = apply_move(D("x^2"), S("-x*y/2"), "elliptic")
    obj = json.loads(json.dumps(rec.to_json_obj()))
    assert TruncatedSeries.from_json_obj(obj["after"]) == S("y^2")


def test_kill_odd_part_examples():
    d, u = kill_odd_part(D("x"), "elliptic")
    assert d.g.is_zero() and u == S("-y/2")
    d, u = kill_odd_part(D("x^2 + y"), "cusp")
    assert d.g == S("x^2 + y") and u.is_zero()
    d, u = kill_odd_part(D("x*lam", XYL), "cusp-family")
    assert d.g.is_zero()
    assert (S("x*lam", XYL) - bracket(u, "cusp-family", 12)) == d.g


@pytest.mark.parametrize("model", ["elliptic", "hyperbolic", "cusp", "cusp-family"])
def test_kill_odd_part_random(model):
    rng = np.random.default_rng(3)
    variables = XYL if model == "cusp-family" else XY
    for _ in range(5):
        terms = {tuple(int(v) for v in rng.integers(0, 4, len(variables))): Fraction(int(rng.integers(-5, 6)), 3)
                 for _ in range(5)}
        d = Density(TruncatedSeries(variables, 10, terms))
        out, u = kill_odd_part(d, model)
        assert out.g.parity_split("x")[1].is_zero()
        assert out.g == d.g - bracket(u, model, 10)


def test_elliptic_reduce_examples():
    out, u, tr = elliptic_reduce(D("x^2", order=6), 0)
    assert out.g == S("y^2", order=6)
    out, u, tr = elliptic_reduce(D("1", order=10), 1)
    assert out.g == S("1", order=10) and u.is_zero() and tr.steps == []
    out, u, tr = elliptic_reduce(D("x^2*y^2", order=12), 1)
    g = out.g
    assert all(e[1] >= 4 for e in g.coefficients)  # d0 = d1 = 0, remainder divisible by y^4
    assert all(e[1] >= 1 for e in u.coefficients)  # u(x, 0) = 0
    assert out.g == S("x^2*y^2") - bracket(u, "elliptic", 12)
    with pytest.raises(TruncationError):
        elliptic_reduce(D("x^2", order=5), 2)
    with pytest.raises(DomainError):
        elliptic_reduce(D("x*y"), 1)


def test_hyperbolic_reduce_gives_function_of_y_squared():
    out, u, _ = elliptic_reduce(D("1 + x^2 + x^2*y^2", order=14), 2, "hyperbolic")
    assert all(e[0] == 0 for e in out.g.coefficients if e[1] <= 4)


def test_cusp_reduce_examples():
    out, u, _ = cusp_reduce(D("y^2"), 6)
    assert out.g.is_zero()
    out, u, _ = cusp_reduce(D("1 + y"), 6)
    assert out.g == S("1 + y") and u.is_zero()
    out, u, _ = cusp_reduce(D("x^2"), 6)
    assert out.g == S("-3/2*y^3")
    assert out.g.coefficient((0, 0)) == 0
    with pytest.raises(DomainError):
        cusp_reduce(D("x"), 4)


def test_cusp_reduce_kills_class_two_and_replays():
    rng = np.random.default_rng(11)
    for _ in range(10):
        terms = {(2 * int(rng.integers(0, 3)), int(rng.integers(0, 9))): Fraction(int(rng.integers(-9, 10)), 7)
                 for _ in range(6)}
        d = Density(TruncatedSeries(XY, 12, terms))
        out, u, tr = cusp_reduce(d, 12)
        for k in range(4):
            assert out.g.coefficient((0, 2 + 3 * k)) == 0
        again, u2 = replay(tr, d)
        assert again.g == out.g and u2 == u
        restored = Transcript(tr.model, [(tuple(s["target"]), tuple(s["generator"]), Fraction(s["num"], s["den"]))
                                         for s in json.loads(tr.to_json())["steps"]])
        assert replay(restored, d)[0].g == out.g


def test_parabolic_examples():
    inv = parabolic_c_recursion(D("lam", XYL))
    assert inv.b == S("-1", XYL, inv.b.order)
    assert inv.c == S("3*y^2", XY, inv.c.order)
    inv = parabolic_c_recursion(D("y", XYL))
    assert inv.b.is_zero() and inv.c == S("y", XY, inv.c.order)
    inv = parabolic_c_recursion(D("lam*x^2", XYL))
    assert inv.c == S("3*x^2*y^2", XY, inv.c.order)
    assert inv.b == S("-x^2/3", XYL, inv.b.order)


def test_parabolic_reconstruction_and_sign():
    for text in ("lam", "1 + y + lam*x^2", "-2 + x^2*y - lam^2", "3*y^2 - lam + x^4"):
        d = D(text, XYL, 10)
        inv = parabolic_c_recursion(d)
        assert reconstruct_from_c(inv, 10) == d.g.truncate(10)
        if d.g.coefficient((0, 0, 0)) != 0:
            assert inv.c.coefficient((0, 0)) > 0
        assert all(e[0] % 2 == 0 for e in inv.c.coefficients)
    assert parabolic_c_recursion(D("-2", XYL)).sign == -1


def test_c_is_invariant_under_odd_x_moves():
    rng = np.random.default_rng(4)
    d = D("1 + y + lam*x^2 - y^2*lam", XYL, 10)
    base = parabolic_c_recursion(d)
    for _ in range(5):
        terms = {(2 * int(rng.integers(0, 3)) + 1, int(rng.integers(0, 3)), int(rng.integers(0, 3))):
                 Fraction(int(rng.integers(-4, 5)), 3) for _ in range(3)}
        u = TruncatedSeries(XYL, 10, terms)
        moved = apply_move(d, u, "cusp-family").after
        assert parabolic_c_recursion(moved).c == base.c


def test_growth_certificate():
    R, ok = growth_certificate(S("1/2 + 4*x^2 + 27*y^3", XYL))
    assert R == pytest.approx(3.0) and ok
    R, ok = growth_certificate(S("5", XYL))
    assert not ok


@st.composite
def polys(draw, variables=XY):
    n = draw(st.integers(0, 5))
    terms = {}
    for _ in range(n):
        exp = tuple(draw(st.integers(0, 4)) for _ in variables)
        terms[exp] = Fraction(draw(st.integers(-7, 7)), draw(st.integers(1, 4)))
    return TruncatedSeries(variables, 10, terms)


@settings(max_examples=40, deadline=None)
@given(polys(), polys(), st.sampled_from(["elliptic", "hyperbolic", "cusp"]))
def test_move_identity_exact(g, u, model):
    assert move_identity_defect(apply_move(Density(g), u, model)).is_zero()
