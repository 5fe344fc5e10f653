"""Model Hamiltonians, level-curve geometry and the right-left model system.

All four models have the form ``H = x^2 + F(y, lam)``:

==========  ====================
Elliptic    F = y^2
Hyperbolic  F = -y^2
Cusp        F = -y^3
CuspFamily  F = -y^3 + lam*y
==========  ====================
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import ChartEscape, ConvergenceError, DomainError
from .powerseries import TruncatedSeries


class ModelHamiltonian(enum.Enum):
    Elliptic = "elliptic"
    Hyperbolic = "hyperbolic"
    Cusp = "cusp"
    CuspFamily = "cusp-family"

    @classmethod
    def parse(cls, name) -> "ModelHamiltonian":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        for m in cls:
            if key in (m.value, m.name.lower()):
                return m
        raise DomainError(f"unknown model {name!r}", choices=[m.value for m in cls])

    # F(t, lam) as ascending coefficients in t (lam-dependence explicit)
    def f_coeffs(self, lam: float = 0.0):
        return {
            ModelHamiltonian.Elliptic: [0.0, 0.0, 1.0],
            ModelHamiltonian.Hyperbolic: [0.0, 0.0, -1.0],
            ModelHamiltonian.Cusp: [0.0, 0.0, 0.0, -1.0],
            ModelHamiltonian.CuspFamily: [0.0, float(lam), 0.0, -1.0],
        }[self]

    def F(self, y, lam=0.0):
        y = np.asarray(y, dtype=float)
        if self is ModelHamiltonian.Elliptic:
            return y * y
        if self is ModelHamiltonian.Hyperbolic:
            return -y * y
        if self is ModelHamiltonian.Cusp:
            return -(y**3)
        return -(y**3) + lam * y

    def H(self, x, y, lam=0.0):
        x = np.asarray(x, dtype=float)
        return x * x + self.F(y, lam)

    def H_x(self, x, y, lam=0.0):
        return 2.0 * np.asarray(x, dtype=float) + 0.0 * np.asarray(y, dtype=float)

    def H_y(self, x, y, lam=0.0):
        y = np.asarray(y, dtype=float) + 0.0 * np.asarray(x, dtype=float)
        if self is ModelHamiltonian.Elliptic:
            return 2.0 * y
        if self is ModelHamiltonian.Hyperbolic:
            return -2.0 * y
        if self is ModelHamiltonian.Cusp:
            return -3.0 * y * y
        return lam - 3.0 * y * y

    def H_lam(self, x, y, lam=0.0):
        if self is ModelHamiltonian.CuspFamily:
            return np.asarray(y, dtype=float) + 0.0 * np.asarray(x, dtype=float)
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)

    def series(self, variables=("x", "y", "lam"), order: int = 64) -> TruncatedSeries:
        """H as an exact series over ``variables`` (which must contain x and y)."""
        text = {
            ModelHamiltonian.Elliptic: "x^2 + y^2",
            ModelHamiltonian.Hyperbolic: "x^2 - y^2",
            ModelHamiltonian.Cusp: "x^2 - y^3",
            ModelHamiltonian.CuspFamily: "x^2 - y^3 + lam*y",
        }[self]
        if self is ModelHamiltonian.CuspFamily and "lam" not in variables:
            raise DomainError("CuspFamily needs the variable lam", variables=list(variables))
        return TruncatedSeries.parse(text, variables, order)

    def critical_points(self, lam: float = 0.0):
        if self is ModelHamiltonian.CuspFamily:
            if lam > 0:
                s = math.sqrt(lam / 3.0)
                return [(0.0, -s), (0.0, s)]
            return [(0.0, 0.0)]
        return [(0.0, 0.0)]


Elliptic = ModelHamiltonian.Elliptic
Hyperbolic = ModelHamiltonian.Hyperbolic
Cusp = ModelHamiltonian.Cusp
CuspFamily = ModelHamiltonian.CuspFamily


def real_cbrt(s):
    """Real cube root ``sign(s)*|s|**(1/3)``."""
    return np.cbrt(s)


# -- roots ---------------------------------------------------------------------


def _polish(coeffs_desc, r, iters=6):
    """Newton steps on a real root of a polynomial given highest-first."""
    p = np.poly1d(coeffs_desc)
    dp = p.deriv()
    for _ in range(iters):
        d = dp(r)
        if d == 0:
            break
        step = p(r) / d
        r -= step
        if abs(step) <= 1e-16 * max(1.0, abs(r)):
            break
    return r


def real_roots(coeffs_asc, polish=True):
    """Sorted real roots of a real polynomial with ascending coefficients."""
    c = np.trim_zeros(np.asarray(coeffs_asc, dtype=float), "b")
    if c.size <= 1:
        return []
    desc = c[::-1]
    roots = np.roots(desc)
    scale = max(1.0, float(np.max(np.abs(roots)))) if roots.size else 1.0
    out = [r.real for r in roots if abs(r.imag) <= 1e-7 * scale]
    if polish:
        out = [_polish(desc, r) for r in out]
    return sorted(out)


def cubic_level_roots(h: float, lam: float):
    """Roots of ``y^3 - lam*y + h = 0`` (where H(0, y) = h for CuspFamily), sorted."""
    roots = real_roots([h, -lam, 0.0, 1.0])
    if len(roots) != 3:
        raise DomainError("level does not cut the axis three times", h=h, lam=lam)
    return tuple(roots)


def swallowtail_contains(h: float, lam: float) -> bool:
    """Membership in D = {lam > 0, h^2 < 4 (lam/3)^3}."""
    return lam > 0 and h * h < 4.0 * (lam / 3.0) ** 3


# -- level geometry -------------------------------------------------------------

BRANCHES = {
    ModelHamiltonian.Elliptic: ("upper", "lower"),
    ModelHamiltonian.Hyperbolic: ("upper", "lower"),
    ModelHamiltonian.Cusp: ("unique",),
    ModelHamiltonian.CuspFamily: ("lower", "middle", "upper", "vanishing"),
}


def level_branch(model, x: float, h: float, lam: float = 0.0, branch: str | None = None) -> float:
    """Solve ``H(x, y, lam) = h`` for y on the selected branch."""
    model = ModelHamiltonian.parse(model)
    branch = branch or BRANCHES[model][0]
    if branch not in BRANCHES[model]:
        raise DomainError(f"unknown branch {branch!r} for {model.value}", choices=list(BRANCHES[model]))
    rhs = h - x * x  # F(y) = rhs
    if model is Elliptic:
        if rhs < 0:
            raise DomainError("no real point on this level", x=x, h=h)
        y = math.sqrt(rhs)
        return y if branch == "upper" else -y
    if model is Hyperbolic:
        if rhs > 0:
            raise DomainError("no real point on this level", x=x, h=h)
        y = math.sqrt(-rhs)
        return y if branch == "upper" else -y
    if model is Cusp:
        return float(real_cbrt(-rhs))
    # y^3 - lam*y + rhs = 0
    roots = real_roots([rhs, -lam, 0.0, 1.0])
    if branch == "vanishing":
        if not (lam > 0 and len(roots) == 3):
            raise DomainError("no vanishing branch at these parameters", x=x, h=h, lam=lam)
        return roots[0]
    if branch == "middle":
        if len(roots) != 3:
            raise DomainError("no middle branch at these parameters", x=x, h=h, lam=lam)
        return roots[1]
    return roots[0] if branch == "lower" else roots[-1]


def trace_to_axis(model, x: float, y: float, lam: float = 0.0, direction: int = -1) -> float:
    """Follow the level component through (x, y) in the -y direction to x = 0.

    Along a component of ``x^2 = P(t) := h - F(t)`` the curve moves in y until
    P vanishes, so the first axis crossing met going down is the largest root
    of P not above y.  ``direction=1`` follows the component upward instead.
    """
    model = ModelHamiltonian.parse(model)
    if x == 0:
        return float(y)
    h = float(model.H(x, y, lam))
    coeffs = [-c for c in model.f_coeffs(lam)]
    coeffs[0] += h
    slack = 1e-14 * max(1.0, abs(y))
    if direction < 0:
        roots = [r for r in real_roots(coeffs) if r <= y + slack]
    else:
        roots = [r for r in real_roots(coeffs) if r >= y - slack][::-1]
    if not roots:
        raise DomainError("level component does not meet the axis", x=x, y=y, lam=lam, h=h)
    return float(roots[-1])


# -- right-left model system ------------------------------------------------------

GERM_VARS = ("Htilde", "Jtilde")


@dataclass(frozen=True)
class GermJ:
    """Polynomial germ J(H~, J~) with J(0,0) = 0 and dJ/dJ~ (0,0) > 0."""

    series: TruncatedSeries

    def __post_init__(self):
        s = self.series
        if s.variables != GERM_VARS:
            raise DomainError("germ variables must be (Htilde, Jtilde)", variables=list(s.variables))
        if s.coefficient((0, 0)) != 0:
            raise DomainError("germ must vanish at the origin")
        if not s.coefficient((0, 1)) > 0:
            raise DomainError("linear Jtilde coefficient must be positive")

    @classmethod
    def parse(cls, text: str, order: int = 12) -> "GermJ":
        text = text.replace("H~", "Htilde").replace("J~", "Jtilde")
        return cls(TruncatedSeries.parse(text, GERM_VARS, order))

    @classmethod
    def from_json_obj(cls, obj) -> "GermJ":
        return cls(TruncatedSeries.from_json_obj(obj))

    def _grad(self):
        ev_h = self.series.partial("Htilde", keep_order=True).to_callable()
        ev_j = self.series.partial("Jtilde", keep_order=True).to_callable()
        return ev_h, ev_j

    def dJ(self, H, J):
        ev_h, ev_j = self._grad()
        return float(ev_h(H, J)), float(ev_j(H, J))


def model_invariants(point):
    """(H~, J~) of a point (x~, y~, lam~[, mu~]) in the canonical model."""
    x, y, lam = point[:3]
    return float(CuspFamily.H(x, y, lam)), float(lam)


def model_period(J: GermJ, point) -> float:
    H, Jt = model_invariants(point)
    return 2.0 * math.pi * J.dJ(H, Jt)[1]


def model_return_time(
    J: GermJ,
    start,
    chart_radius: float = 1.0,
    rtol: float = 1e-12,
    atol: float = 1e-14,
    xtol: float = 1e-13,
) -> float:
    """Time for the flow of J(H~, J~) to go from {mu~ = 0} to the glued section.

    The model glues {mu~ = 0} to its image under the time-2pi map of the flow
    of J.  That image is the graph ``mu~ = tau(q)`` over the planar point q,
    with ``tau(q) = 2pi dJ/dJ~ + dJ/dH~ * int_{-2pi}^0 y(s) ds`` along the
    planar flow through q.  tau is evaluated by an independent backward
    integration; the crossing time is located by a bracketed root search.
    """
    x0, y0, lam = (float(v) for v in start[:3])
    mu0 = float(start[3]) if len(start) > 3 else 0.0
    if mu0 != 0.0:
        raise DomainError("start must lie on the section mu = 0", mu=mu0)
    H0, Jt = model_invariants((x0, y0, lam))
    JH, JJ = J.dJ(H0, Jt)  # constant along the flow

    def rhs(t, z):
        x, y, mu = z
        return [-JH * (lam - 3.0 * y * y), JH * 2.0 * x, JH * y + JJ]

    def planar(t, z):
        x, y, _ = z
        return [-JH * (lam - 3.0 * y * y), JH * 2.0 * x, y]

    def escape(t, z):
        return chart_radius - max(abs(z[0]), abs(z[1]))

    escape.terminal = True

    def check_escape(sol):
        if sol.status == 1 or not sol.success:
            raise ChartEscape("flow leaves the chart", radius=chart_radius, t=float(sol.t[-1]))

    t_end = 4.0 * math.pi
    main = solve_ivp(rhs, (0.0, t_end), [x0, y0, 0.0], method="DOP853", rtol=rtol, atol=atol,
                     dense_output=True, events=escape)
    check_escape(main)

    def tau(x, y):
        back = solve_ivp(planar, (0.0, -2.0 * math.pi), [x, y, 0.0], method="DOP853",
                         rtol=rtol, atol=atol, events=escape)
        check_escape(back)
        # the third component integrates y over [0, -2pi]; flip to [-2pi, 0]
        return 2.0 * math.pi * JJ - JH * back.y[2, -1]

    def section(t):
        x, y, mu = main.sol(t)
        return mu - tau(x, y)

    lo, f_lo = 0.0, section(0.0)
    if f_lo >= 0:
        raise ConvergenceError("start already beyond the glued section", value=f_lo)
    step = math.pi / 4.0
    hi = lo
    while True:
        hi = lo + step
        if hi > t_end:
            raise ConvergenceError("no section crossing bracketed", t_max=t_end)
        f_hi = section(hi)
        if f_hi > 0:
            break
        lo, f_lo = hi, f_hi
    return brentq(section, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)


def random_germ(rng: np.random.Generator, degree: int = 4, bound: float = 0.25) -> GermJ:
    """Random polynomial germ with coefficients in [-bound, bound] and positive dJ/dJ~(0)."""
    coeffs = {}
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            if i + j == 0:
                continue
            c = Fraction(rng.uniform(-bound, bound)).limit_denominator(10**6)
            coeffs[(i, j)] = c
    coeffs[(0, 1)] = Fraction(rng.uniform(0.05, bound)).limit_denominator(10**6)
    return GermJ(TruncatedSeries(GERM_VARS, degree, coeffs))
