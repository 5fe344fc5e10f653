import math

import numpy as np
import pytest
from scipy import integrate

from flapinv.errors import ConvergenceError, DomainError
from flapinv.powerseries import TruncatedSeries
from flapinv.quadrature import (
    Region,
    SingularIntegrand,
    density_function,
    gauss_legendre,
    integrate_region,
    integrate_singular,
    tanh_sinh,
)


def test_singular_examples():
    assert integrate_singular(SingularIntegrand(lambda t: 1.0, -0.5, -0.5, 0.0, 1.0)) == pytest.approx(math.pi, abs=1e-10)
    assert integrate_singular(SingularIntegrand(lambda t: 1.0, 0.0, 0.0, 0.0, 2.0)) == pytest.approx(2.0, abs=1e-10)
    three_pi_8 = integrate_singular(SingularIntegrand(lambda t: t, 0.5, -0.5, 0.0, 1.0))
    assert three_pi_8 == pytest.approx(3 * math.pi / 8, abs=1e-10)


def test_singular_validation():
    with pytest.raises(DomainError):
        SingularIntegrand(lambda t: 1.0, -1.0, 0.0)
    with pytest.raises(DomainError):
        SingularIntegrand(lambda t: 1.0, 0.0, 0.0, 1.0, 0.0)


def test_non_convergence_carries_estimates():
    with pytest.raises(ConvergenceError) as info:
        tanh_sinh(lambda t, da, db: np.sin(1.0 / (da + 1e-9)), 0.0, 1.0, tol=1e-15, max_level=4)
    assert len(info.value.payload["estimates"]) == 2
    assert info.value.code == "non-convergence"


def test_gauss_legendre_polynomial_exact():
    assert gauss_legendre(lambda t: t**7 - t, 0.0, 2.0, n=8) == pytest.approx(2.0**8 / 8 - 2.0, abs=1e-12)


def test_region_examples():
    assert integrate_region(1, Region("disk", h=1.0)).value == pytest.approx(math.pi, abs=1e-10)
    oracle, _ = integrate.quad(lambda x: np.cbrt(x * x + 1) - np.cbrt(x * x), -1, 1, epsabs=1e-13)
    assert oracle == pytest.approx(0.9896, abs=1e-4)
    cusp = integrate_region(1, Region("cusp-section", h=-1.0, eps=1.0)).value
    assert cusp == pytest.approx(oracle, abs=1e-9)
    loop_oracle, _ = integrate.quad(lambda s: 2 * math.sqrt(s - s**3), 0, 1, epsabs=1e-13)
    loop = integrate_region(1, Region("vanishing-loop", h=0.0, lam=1.0)).value
    assert loop == pytest.approx(loop_oracle, abs=1e-9)
    assert loop == pytest.approx(0.9585, abs=1e-4)


def test_empty_region_is_flagged():
    r = integrate_region(1, Region("hyperbolic-quadrant", h=0.0, eps=0.5))
    assert r.value == 0.0 and r.empty
    assert integrate_region(1, Region("disk", h=0.0)).empty
    with pytest.raises(DomainError):
        Region("hyperbolic-quadrant", h=1.0, eps=0.0)
    with pytest.raises(DomainError):
        Region("annulus")


def test_linearity_and_symmetry():
    f = TruncatedSeries.parse("1 + y^2", ("x", "y"), 6)
    g = TruncatedSeries.parse("x^2*y + 2", ("x", "y"), 6)
    reg = Region("cusp-section", h=-0.5, eps=0.8)
    a, b = 2.0, -3.0
    combo = integrate_region(f.scale(2) + g.scale(-3), reg).value
    assert combo == pytest.approx(a * integrate_region(f, reg).value + b * integrate_region(g, reg).value, abs=2e-10)
    for kind, kw in (("disk", {"h": 0.7}), ("cusp-section", {"h": -0.4, "eps": 0.6}), ("vanishing-loop", {"h": 0.01, "lam": 0.5})):
        odd = integrate_region(lambda x, y, lam: x * (1 + y * y), Region(kind, **kw)).value
        assert abs(odd) <= 1e-10


def test_refinement_is_stable():
    fun = lambda t, da, db: np.cos(t) / np.sqrt(da)  # noqa: E731
    coarse = tanh_sinh(fun, 0.0, 1.0, tol=1e-8)
    fine = tanh_sinh(fun, 0.0, 1.0, tol=5e-9)
    assert abs(coarse - fine) <= 1e-8


def test_density_function_accepts_several_forms():
    s = TruncatedSeries.parse("x + 2*y", ("x", "y"), 4)
    for g in (s, lambda x, y: x + 2 * y, lambda x, y, lam: x + 2 * y):
        assert density_function(g)(1.0, 2.0, 0.0) == pytest.approx(5.0)
    assert density_function(3)(0.1, 0.2, 0.3) == pytest.approx(3.0)
