import math

import numpy as np
import pytest

from flapinv.errors import ChartEscape, DomainError
from flapinv.hamiltonians import (
    Cusp,
    CuspFamily,
    Elliptic,
    GermJ,
    Hyperbolic,
    ModelHamiltonian,
    level_branch,
    model_period,
    model_return_time,
    random_germ,
    real_cbrt,
    trace_to_axis,
)
from flapinv.powerseries import TruncatedSeries


def test_model_formulas_and_critical_points():
    assert Elliptic.H(1.0, 2.0, 0.0) == 5.0
    assert Hyperbolic.H(1.0, 2.0, 0.0) == -3.0
    rng = np.random.default_rng(1)
    x, y = rng.uniform(-1, 1, (2, 50))
    assert np.allclose(CuspFamily.H(x, y, 0.0), Cusp.H(x, y, 0.0), atol=0, rtol=0)
    crit = CuspFamily.critical_points(0.75)
    assert sorted(p[1] for p in crit) == pytest.approx([-0.5, 0.5])
    assert ModelHamiltonian.parse("cusp-family") is CuspFamily
    with pytest.raises(DomainError):
        ModelHamiltonian.parse("parabola")


def test_real_cube_root_convention():
    assert real_cbrt(-8.0) == pytest.approx(-2.0)
    assert real_cbrt(27.0) == pytest.approx(3.0)


def test_level_branch_examples():
    assert level_branch(Cusp, 0.0, -1.0) == pytest.approx(1.0, abs=1e-14)
    assert level_branch(Elliptic, 0.0, 4.0, branch="upper") == pytest.approx(2.0, abs=1e-14)
    assert level_branch(CuspFamily, 0.0, 0.0, 1.0, "vanishing") == pytest.approx(-1.0, abs=1e-14)
    with pytest.raises(DomainError):
        level_branch(Elliptic, 3.0, 4.0)


def test_level_branch_is_a_right_inverse_of_h():
    rng = np.random.default_rng(2)
    for _ in range(200):
        x = rng.uniform(-1, 1)
        h = rng.uniform(-1, 1)
        y = level_branch(Cusp, x, h)
        assert Cusp.H(x, y, 0.0) == pytest.approx(h, abs=1e-12)
        lam = rng.uniform(0.1, 1)
        y = level_branch(CuspFamily, x, h, lam, "lower")
        assert CuspFamily.H(x, y, lam) == pytest.approx(h, abs=1e-12)


def test_trace_to_axis_examples_and_invariance():
    assert trace_to_axis(CuspFamily, 0.0, 0.3, 0.5) == 0.3
    h = -0.7
    x = 0.4
    y = real_cbrt(x * x - h)
    assert trace_to_axis(CuspFamily, x, y, 0.0) == pytest.approx(real_cbrt(-h), abs=1e-12)
    # a point on the vanishing loop of lam = 1 at h = 0
    y = -0.8
    x = math.sqrt(y**3 - y)
    assert trace_to_axis(CuspFamily, x, y, 1.0) == pytest.approx(-1.0, abs=1e-12)
    # two points of one component give the same answer
    y2 = -0.5
    x2 = math.sqrt(y2**3 - y2)
    assert trace_to_axis(CuspFamily, x2, y2, 1.0) == pytest.approx(trace_to_axis(CuspFamily, x, y, 1.0), abs=1e-10)
    f = trace_to_axis(CuspFamily, 0.3, -0.2, 0.4)
    assert trace_to_axis(CuspFamily, 0.0, f, 0.4) == f


def test_germ_validation_and_json():
    with pytest.raises(DomainError):
        GermJ.parse("1 + Jtilde")
    with pytest.raises(DomainError):
        GermJ.parse("-Jtilde")
    with pytest.raises(DomainError):
        GermJ(TruncatedSeries.parse("x", ("x", "y"), 4))
    J = GermJ.parse("J~ + H~*J~")
    assert GermJ.from_json_obj(J.series.to_json_obj()) == J


def test_model_period_examples():
    assert model_period(GermJ.parse("Jtilde"), (0.3, -0.1, 0.2)) == pytest.approx(2 * math.pi)
    assert model_period(GermJ.parse("Jtilde + Jtilde^2/2"), (0.0, 0.0, 0.1)) == pytest.approx(2 * math.pi * 1.1)
    assert model_period(GermJ.parse("Jtilde + Htilde*Jtilde"), (0.0, 0.0, 0.3)) == pytest.approx(2 * math.pi)


@pytest.mark.parametrize("germ", ["Jtilde", "Jtilde + Jtilde^2/2", "Jtilde + Htilde*Jtilde/10"])
def test_model_return_time_examples(germ):
    T = model_return_time(GermJ.parse(germ), (0.01, -0.08, 0.02))
    assert T == pytest.approx(2 * math.pi, abs=1e-8)


def test_model_return_time_random_germs():
    rng = np.random.default_rng(5)
    for _ in range(3):
        J = random_germ(rng)
        assert J.series.coefficient((0, 1)) > 0
        assert model_return_time(J, (0.02, -0.07, 0.02)) == pytest.approx(2 * math.pi, abs=1e-8)


def test_model_return_time_reports_escape():
    with pytest.raises(ChartEscape):
        model_return_time(GermJ.parse("Jtilde + Htilde"), (0.5, 0.5, 0.0), chart_radius=0.6)
    with pytest.raises(DomainError):
        model_return_time(GermJ.parse("Jtilde"), (0.0, 0.0, 0.0, 1.0))
