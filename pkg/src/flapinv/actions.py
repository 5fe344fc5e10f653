"""Action variables (area over 2pi) for the model singularities."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FlapinvError
from .hamiltonians import swallowtail_contains
from .quadrature import DEFAULT_TOL, Region, integrate_region

TWO_PI = 2.0 * math.pi
DEFAULT_EPS = 0.5


def elliptic_action(g, h: float, tol: float = DEFAULT_TOL) -> float:
    if h < 0:
        raise DomainError("elliptic action needs h >= 0", h=h)
    return integrate_region(g, Region("disk", h=h), tol).value / TWO_PI


def hyperbolic_quadrant_action(g, h: float, eps: float = DEFAULT_EPS, tol: float = DEFAULT_TOL) -> float:
    if not eps > 0:
        raise DomainError("eps must be positive", eps=eps)
    if h <= -eps * eps:
        raise DomainError("need h > -eps^2", h=h, eps=eps)
    return integrate_region(g, Region("hyperbolic-quadrant", h=h, eps=eps), tol).value / TWO_PI


def cusp_section_action(g, h: float, eps: float = DEFAULT_EPS, tol: float = DEFAULT_TOL) -> float:
    if not eps > 0:
        raise DomainError("eps must be positive", eps=eps)
    return integrate_region(g, Region("cusp-section", h=h, eps=eps), tol).value / TWO_PI


def cusp_section_boundary_term(u, h: float, eps: float = DEFAULT_EPS, tol: float = DEFAULT_TOL) -> float:
    """Change of the section action under the move by u, from data on x = +-eps.

    Stokes on R(h) gives ``int_R du^dH = int_{dR} u dH``; the level pieces
    contribute nothing, leaving ``-(1/2pi) [int u H_y dy]_{x=-eps}^{x=eps}``
    taken from y = |x|^(2/3) to y = cbrt(x^2 - h) on each section.
    """
    from .quadrature import density_function, gauss_legendre

    f = density_function(u)
    total = 0.0
    for sgn in (1.0, -1.0):
        x = sgn * eps
        lo, hi = np.cbrt(x * x), np.cbrt(x * x - h)
        val = gauss_legendre(lambda y: f(x + 0.0 * y, y, 0.0) * (-3.0 * y * y), lo, hi, 64)
        total += sgn * float(val)
    return -total / TWO_PI


def vanishing_cycle_action(g, h: float, lam: float, tol: float = DEFAULT_TOL) -> float:
    if not swallowtail_contains(h, lam):
        raise DomainError("(h, lam) outside the swallow-tail domain", h=h, lam=lam)
    return integrate_region(g, Region("vanishing-loop", h=h, lam=lam), tol).value / TWO_PI


def saddle_level(lam: float) -> float:
    """Critical value at the saddle (0, sqrt(lam/3)) of x^2 - y^3 + lam*y."""
    return 2.0 * (lam / 3.0) ** 1.5


def sep_lobe_action(g, lam: float, tol: float = DEFAULT_TOL) -> float:
    """Separatrix-lobe area over 2pi; the h -> saddle-level limit of the vanishing action.

    The lobe is integrated directly: at the saddle level the cubic factors as
    (y - s)^2 (y + 2s), so the half-width (s - y) sqrt(y + 2s) is explicit.
    """
    if not lam > 0:
        raise DomainError("separatrix lobe needs lam > 0", lam=lam)
    return integrate_region(g, Region("separatrix-lobe", lam=lam), tol).value / TWO_PI


# -- profiles -------------------------------------------------------------------

PROFILE_KINDS = ("elliptic", "hyperbolic", "cusp-section", "vanishing-cycle", "separatrix-lobe")


@dataclass(frozen=True)
class ActionProfile:
    kind: str
    grid: tuple
    values: tuple
    density: str = ""
    eps: float | None = None
    columns: tuple = field(default=("h",))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "eps", *self.columns, "value"])
        eps = "" if self.eps is None else fmt(self.eps)
        for point, v in zip(self.grid, self.values):
            point = point if isinstance(point, tuple) else (point,)
            w.writerow([self.kind, eps, *(fmt(p) for p in point), fmt(v)])
        return buf.getvalue()


def fmt(v: float) -> str:
    """17-significant-digit float formatting used for all CSV output."""
    return f"{float(v):.17g}"


def action_profile(kind: str, g, grid, params=None, tol: float = DEFAULT_TOL) -> ActionProfile:
    """Evaluate an action on a grid of h values, (h, lam) pairs, or lam values (lobe)."""
    params = dict(params or {})
    if kind not in PROFILE_KINDS:
        raise DomainError(f"unknown action kind {kind!r}", kinds=list(PROFILE_KINDS))
    eps = params.get("eps", DEFAULT_EPS) if kind in ("hyperbolic", "cusp-section") else None
    lam = params.get("lam")
    columns = ("h",)
    pts = []
    for p in grid:
        if isinstance(p, (list, tuple)):
            pts.append(tuple(float(v) for v in p))
        else:
            pts.append(float(p))
    if kind == "vanishing-cycle":
        columns = ("h", "lam")
        pts = [p if isinstance(p, tuple) else (p, float(lam)) for p in pts]
    elif kind == "separatrix-lobe":
        columns = ("lam",)
    values = []
    for i, p in enumerate(pts):
        try:
            if kind == "elliptic":
                v = elliptic_action(g, p, tol)
            elif kind == "hyperbolic":
                v = hyperbolic_quadrant_action(g, p, eps, tol)
            elif kind == "cusp-section":
                v = cusp_section_action(g, p, eps, tol)
            elif kind == "vanishing-cycle":
                v = vanishing_cycle_action(g, p[0], p[1], tol)
            else:
                v = sep_lobe_action(g, p, tol)
        except FlapinvError as exc:
            exc.payload["grid_index"] = i
            raise
        if not math.isfinite(v):
            raise DomainError("non-finite action value", grid_index=i)
        values.append(v)
    return ActionProfile(kind, tuple(pts), tuple(values), density=str(g), eps=eps, columns=columns)
