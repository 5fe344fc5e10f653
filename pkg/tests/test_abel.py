import numpy as np
import pytest

from flapinv.abel import SampledFunction, abel_forward, abel_invert, elliptic_normal_form_f, five_point_derivative
from flapinv.errors import ConvergenceError, DomainError
from flapinv.moves import bracket
from flapinv.powerseries import TruncatedSeries

XY = ("x", "y")
HS = np.linspace(0.0, 0.25, 65)


def forward_samples(f):
    return SampledFunction(HS, np.array([abel_forward(f, h) if h > 0 else f(0.0) / 2 for h in HS]))


def test_forward_examples():
    for h in (0.1, 0.3, 1.0):
        assert abel_forward(lambda t: 1.0 + 0 * t, h) == pytest.approx(0.5, abs=1e-13)
        assert abel_forward(lambda t: t, h) == pytest.approx(h / 4, abs=1e-13)
    with pytest.raises(DomainError):
        abel_forward(lambda t: t, 0.0)


@pytest.mark.parametrize("f", [lambda t: 1 + t * t, lambda t: np.exp(-t), lambda t: 2 - 3 * t])
def test_invert_recovers_profile(f):
    out = abel_invert(forward_samples(f))
    assert np.max(np.abs(out.values - f(HS))) <= 1e-9


def test_normal_form_of_y_squared():
    F = elliptic_normal_form_f(TruncatedSeries.parse("y^2", XY, 6), n=33)
    assert np.max(np.abs(F.values - F.t)) <= 1e-10


def test_normal_form_is_move_invariant_and_positive():
    g = TruncatedSeries.parse("1 + x^2 + y^3", XY, 6)
    g1 = g - bracket(TruncatedSeries.parse("x^2*y + y^3", XY, 6), "elliptic", 6)
    F0 = elliptic_normal_form_f(g, n=33)
    F1 = elliptic_normal_form_f(g1, n=33)
    assert np.max(np.abs(F0.values - F1.values)) <= 1e-8
    assert np.all(F0.values > 0)
    assert F0.values[0] == pytest.approx(1.0, abs=1e-8)


def test_rough_data_is_rejected():
    rng = np.random.default_rng(0)
    with pytest.raises(ConvergenceError) as info:
        abel_invert(SampledFunction(HS, 0.5 + 1e-2 * rng.standard_normal(HS.size)))
    assert info.value.payload["discrepancy"] > 0


def test_csv_round_trip_and_validation():
    s = SampledFunction(HS[:9], np.sin(HS[:9]))
    text = s.to_csv()
    assert text.splitlines()[0] == "t,f"
    back = SampledFunction.from_csv(text)
    assert np.array_equal(back.t, s.t) and np.array_equal(back.values, s.values)
    with pytest.raises(DomainError):
        SampledFunction(np.array([0.0, 2.0, 1.0, 3.0]), np.zeros(4))
    with pytest.raises(DomainError):
        SampledFunction(np.arange(3.0), np.zeros(3))


def test_five_point_derivative_exact_on_quartics():
    t = np.linspace(0, 1, 11)
    d = five_point_derivative(t**4 - t, t[1] - t[0])
    assert np.max(np.abs(d - (4 * t**3 - 1))) <= 1e-12
