"""Quadratic spherical pendulum H = |p|^2/2 + z - z^2, J = x p_y - y p_x.

Reducing by the rotation about the z-axis at J = j gives one degree of
freedom in (z, pz), pz the momentum conjugate to z (pz = zdot / (1 - z^2)):

    H_red = (1 - z^2) pz^2 / 2 + W_j(z),   W_j(z) = j^2 / (2 (1 - z^2)) + z - z^2.

Critical points of W_j solve N(z) = (1 - 2z)(1 - z^2)^2 + j^2 z = 0.  For
small |j| there are three (a southern minimum, a barrier maximum and a
northern minimum); the last two merge at j = +-j_c, the parabolic orbits.
The flap is the triangle bounded by the northern minimum branch (with the
north pole as elliptic-elliptic vertex at j = 0) and the barrier branch.

Reduced actions are ``(1/pi) int sqrt(Nh(z)) / (1 - z^2) dz`` between
turning points, where ``Nh = 2 (h - W_j) (1 - z^2)^2 / (1 - z^2)`` is the
quartic ``-2z^4 + 2z^3 + (2 - 2h) z^2 - 2z + 2h - j^2``.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, curve_fit

from .actions import fmt
from .errors import ConvergenceError, DomainError
from .hamiltonians import real_roots
from .quadrature import tanh_sinh

ACTION_TOL = 1e-13
CYCLES = ("outer", "flap-upper", "flap-lower")
K_BOUND = 8


# -- reduced system ---------------------------------------------------------------


def W(j, z):
    z = np.asarray(z, dtype=float)
    return j * j / (2.0 * (1.0 - z * z)) + z - z * z


def dW(j, z):
    z = np.asarray(z, dtype=float)
    return j * j * z / (1.0 - z * z) ** 2 + 1.0 - 2.0 * z


def d2W(j, z):
    z = np.asarray(z, dtype=float)
    return j * j * (1.0 + 3.0 * z * z) / (1.0 - z * z) ** 3 - 2.0


def reduced_hamiltonian(j, z, pz):
    z = np.asarray(z, dtype=float)
    return 0.5 * (1.0 - z * z) * np.asarray(pz) ** 2 + W(j, z)


def embed_to_reduced(q, p):
    """(z, pz, j, h) for a point of T*S^2 given in R^3 coordinates (q on the sphere, p tangent)."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    z = q[..., 2]
    j = q[..., 0] * p[..., 1] - q[..., 1] * p[..., 0]
    h = 0.5 * np.sum(p * p, axis=-1) + z - z * z
    pz = p[..., 2] / (1.0 - z * z)
    return z, pz, j, h


def reduction_check(n: int = 1000, seed: int = 0) -> float:
    """Max |H_red(z, pz; j) - h| over random points of T*S^2."""
    rng = np.random.default_rng(seed)
    q = rng.normal(size=(n, 3))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    v = rng.normal(size=(n, 3))
    p = v - np.sum(v * q, axis=1, keepdims=True) * q
    z, pz, j, h = embed_to_reduced(q, p)
    return float(np.max(np.abs(reduced_hamiltonian(j, z, pz) - h)))


def reduced_orbit(j: float, z0: float, pz0: float, t_end: float, rtol: float = 1e-12):
    """Integrate the reduced flow; returns (t, z, pz) arrays."""

    def rhs(t, s):
        z, pz = s
        return [(1.0 - z * z) * pz, z * pz * pz - dW(j, z)]

    sol = solve_ivp(rhs, (0.0, t_end), [z0, pz0], method="DOP853", rtol=rtol, atol=1e-14, dense_output=False)
    return sol.t, sol.y[0], sol.y[1]


# -- exact root isolation ------------------------------------------------------------


def critical_numerator(j2: Fraction) -> list[Fraction]:
    """Coefficients (highest first) of N(z) = (1 - 2z)(1 - z^2)^2 + j^2 z."""
    # (1 - 2z)(1 - 2z^2 + z^4) = -2z^5 + z^4 + 4z^3 - 2z^2 - 2z + 1
    c = [Fraction(-2), Fraction(1), Fraction(4), Fraction(-2), Fraction(-2), Fraction(1)]
    c[4] += j2
    return c


def _peval(c, x):
    acc = Fraction(0)
    for a in c:
        acc = acc * x + a
    return acc


def _pderiv(c):
    n = len(c) - 1
    return [a * (n - i) for i, a in enumerate(c[:-1])]


def _prem(a, b):
    a = list(a)
    while len(a) >= len(b) and any(a):
        f = a[0] / b[0]
        for i in range(len(b)):
            a[i] -= f * b[i]
        a.pop(0)
    while a and a[0] == 0:
        a.pop(0)
    return a


def sturm_chain(c):
    chain = [list(c), _pderiv(c)]
    while True:
        r = _prem(chain[-2], chain[-1])
        if not r:
            break
        chain.append([-v for v in r])
    return chain


def _sign_changes(chain, x):
    signs = [s for s in (_peval(p, x) for p in chain) if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0))


def count_roots(chain, a: Fraction, b: Fraction) -> int:
    """Distinct real roots in (a, b]."""
    return _sign_changes(chain, a) - _sign_changes(chain, b)


def isolate_roots(c, a: Fraction, b: Fraction, width: Fraction = Fraction(1, 2**20)):
    """Disjoint rational intervals (lo, hi], each holding exactly one root of c in (a, b)."""
    chain = sturm_chain(c)
    out = []
    stack = [(a, b)]
    while stack:
        lo, hi = stack.pop()
        n = count_roots(chain, lo, hi)
        if n == 0:
            continue
        if n == 1 and hi - lo <= width:
            out.append((lo, hi))
            continue
        if hi - lo < Fraction(1, 2**200):
            raise ConvergenceError("root isolation failed (multiple root?)", lo=float(lo), hi=float(hi))
        mid = (lo + hi) / 2
        stack.append((mid, hi))
        stack.append((lo, mid))
    out.sort()
    return out


def _refine(c, lo, hi):
    cf = [float(a) for a in c]
    f = lambda x: float(np.polyval(cf, x))  # noqa: E731
    flo, fhi = f(float(lo)), f(float(hi))
    if flo == 0:
        return float(lo)
    if fhi == 0:
        return float(hi)
    if (flo > 0) == (fhi > 0):
        return 0.5 * (float(lo) + float(hi))
    return brentq(f, float(lo), float(hi), xtol=1e-16, rtol=1e-15, maxiter=200)


def critical_points(j: float):
    """Critical points of W_j in (-1, 1) as a list of (z, value, kind), sorted by z."""
    j2 = Fraction(j) ** 2
    c = critical_numerator(j2)
    one = Fraction(1)
    eps = Fraction(1, 2**40)
    out = []
    for lo, hi in isolate_roots(c, -one + eps, one - eps):
        z = _refine(c, lo, hi)
        kind = "min" if d2W(j, z) > 0 else "max"
        out.append((z, float(W(j, z)), kind))
    return out


def cusp_point():
    """(j_c, z_c, h_c) with j_c > 0: the barrier maximum and northern minimum merge.

    On (1/2, 1) critical points satisfy j^2 = phi(z) = (2z - 1)(1 - z^2)^2 / z;
    the cusp is the maximum of phi, a root of 8z^3 - 3z^2 - 1.
    """
    roots = [r for r in real_roots([-1.0, 0.0, -3.0, 8.0]) if 0.5 < r < 1.0]
    zc = roots[0]
    jc = math.sqrt((2 * zc - 1) * (1 - zc * zc) ** 2 / zc)
    return jc, float(zc), float(W(jc, zc))


# -- bifurcation diagram ------------------------------------------------------------------

BRANCH_NAMES = ("south-min", "barrier-max", "north-min")


@dataclass
class BifurcationDiagram:
    j_grid: list
    branches: dict  # name -> list of (j, h)
    cusps: list  # (j, h, z)
    ee_points: list  # (j, h, label)
    flap_vertices: list  # EE points on the flap boundary
    counts: list = field(default_factory=list)

    @property
    def has_flap(self) -> bool:
        return len(self.cusps) == 2 and len(self.flap_vertices) == 1

    def to_json_obj(self):
        return {
            "cusps": [{"j": j, "h": h, "z": z} for j, h, z in self.cusps],
            "elliptic_elliptic": [{"j": j, "h": h, "label": lab} for j, h, lab in self.ee_points],
            "flap_vertices": [{"j": j, "h": h, "label": lab} for j, h, lab in self.flap_vertices],
            "branch_sizes": {k: len(v) for k, v in self.branches.items()},
        }


def _critical_points_at(j):
    try:
        return critical_points(j)
    except ConvergenceError as exc:
        exc.payload["j"] = j
        raise


def critical_values(j_grid, threads: int = 1) -> BifurcationDiagram:
    branches = {name: [] for name in BRANCH_NAMES}
    counts = []
    j_grid = [float(j) for j in j_grid]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        all_pts = list(pool.map(_critical_points_at, j_grid))
    for j, pts in zip(j_grid, all_pts):
        counts.append(len(pts))
        if j == 0.0:
            # the reduction is singular at the poles, which are equilibria
            branches["south-min"].append((j, -2.0))
            branches["north-min"].append((j, 0.0))
            for z, h, kind in pts:
                branches["barrier-max"].append((j, h))
            continue
        if len(pts) == 3:
            for name, (z, h, kind) in zip(BRANCH_NAMES, pts):
                branches[name].append((j, h))
        else:
            for z, h, kind in pts:
                branches["south-min"].append((j, h))
    jc, zc, hc = cusp_point()
    cusps = []
    for a, b, na, nb in zip(j_grid, j_grid[1:], counts, counts[1:]):
        if na != nb and 3 in (na, nb):
            for s in (-1.0, 1.0):
                if min(a, b) <= s * jc <= max(a, b):
                    cusps.append((s * jc, hc, zc))
    cusps = sorted(set(cusps))
    ee = []
    if any(float(j) == 0.0 for j in j_grid) or (min(j_grid) < 0 < max(j_grid)):
        ee = [(0.0, 0.0, "north pole"), (0.0, -2.0, "south pole")]
    # the north pole is the vertex where the two northern-minimum edges meet
    flap_vertices = [p for p in ee if p[2] == "north pole" and len(cusps) == 2 and cusps[0][0] < 0 < cusps[1][0]]
    return BifurcationDiagram(list(map(float, j_grid)), branches, cusps, ee, flap_vertices, counts)


# -- reduced actions -----------------------------------------------------------------------


def level_quartic(j: float, h: float):
    """Ascending coefficients of Nh(z) = 2 (h - W_j(z)) (1 - z^2)."""
    return [2 * h - j * j, -2.0, 2.0 - 2 * h, 2.0, -2.0]


def _den(t, da, db, a, b):
    """1 - t^2, exact near a pole that is also an integration endpoint."""
    return (da if a == -1.0 else 1.0 + t) * (db if b == 1.0 else 1.0 - t)


def _snap_poles(roots, j):
    # at j = 0 the poles are turning points: Nh has the exact factor 1 - z^2
    if j != 0:
        return roots
    return [-1.0 if abs(r + 1) < 1e-9 else 1.0 if abs(r - 1) < 1e-9 else r for r in roots]


def _level_roots(j: float, h: float):
    """Real roots (polished, poles snapped at j = 0) and the monic quadratic of any complex pair."""
    desc = np.array(level_quartic(j, h)[::-1])
    roots = np.roots(desc)
    real = [r.real for r in roots if abs(r.imag) <= 1e-12 * max(1.0, abs(r))]
    cplx = [r for r in roots if abs(r.imag) > 1e-12 * max(1.0, abs(r))]
    real = sorted(_snap_poles([_polish_root(desc, r) for r in real], j))
    quad = None
    if cplx:
        r = cplx[0]
        quad = np.array([1.0, -2.0 * r.real, abs(r) ** 2])
    return real, quad


def turning_points(j: float, h: float):
    real, _ = _level_roots(j, h)
    return [r for r in real if -1.0 <= r <= 1.0]


def wells(j: float, h: float):
    """Intervals (a, b) of allowed motion, labelled 'outer', 'flap-lower' or 'flap-upper'."""
    real, _ = _level_roots(j, h)
    inside = [r for r in real if -1.0 <= r <= 1.0]
    c = level_quartic(j, h)
    allowed = [(a, b) for a, b in zip(inside, inside[1:]) if np.polyval(c[::-1], 0.5 * (a + b)) > 0]
    if j == 0:
        zm = 0.5
    else:
        maxima = [p for p in critical_points(j) if p[2] == "max"]
        zm = maxima[0][0] if maxima else None
    out = []
    for a, b in allowed:
        if zm is None or a < zm < b:
            kind = "outer"
        elif b <= zm:
            kind = "flap-lower"
        else:
            kind = "flap-upper"
        out.append((kind, a, b))
    return out


def reduced_action(j: float, h: float, cycle: str, tol: float = ACTION_TOL) -> float:
    """Action (1/pi) int pz dz of the selected cycle of the reduced system at energy h."""
    if cycle not in CYCLES:
        raise DomainError(f"unknown cycle {cycle!r}", choices=list(CYCLES))
    real, quad = _level_roots(j, h)
    found = [w for w in wells(j, h) if w[0] == cycle]
    if not found:
        raise DomainError(f"cycle {cycle!r} absent at this level", j=j, h=h, present=[w[0] for w in wells(j, h)])
    _, a, b = found[0]
    others = [r for r in real if r != a and r != b]
    if quad is not None and a < -quad[1] / 2 < b:
        # a nearly double root off the axis: split there
        zs = -quad[1] / 2
        return (_well_integral(a, zs, a, b, others, quad, tol) + _well_integral(zs, b, a, b, others, quad, tol)) / math.pi
    return _well_integral(a, b, a, b, others, quad, tol) / math.pi


def _well_integral(lo, hi, a, b, others, quad, tol):
    """int_lo^hi sqrt(2 (z-a)(b-z) prod|z-r| q(z)) / (1 - z^2), with [lo, hi] inside [a, b]."""

    def f(t, dl, dh):
        za = dl if lo == a else t - a
        zb = dh if hi == b else b - t
        val = 2.0 * za * zb
        for r in others:
            val = val * np.abs(t - r)
        if quad is not None:
            val = val * np.polyval(quad, t)
        return np.sqrt(np.maximum(val, 0.0)) / _den(t, dl, dh, lo, hi)

    return tanh_sinh(f, lo, hi, tol)


def _polish_root(desc, r):
    p = np.poly1d(desc)
    dp = p.deriv()
    for _ in range(8):
        d = dp(r)
        if d == 0:
            break
        step = p(r) / d
        r -= step
        if abs(step) < 1e-17:
            break
    return float(r)



def hyperbolic_level(j: float):
    """(z_s, h_s): the barrier maximum of W_j and its value."""
    pts = critical_points(j)
    maxima = [p for p in pts if p[2] == "max"]
    if not maxima:
        raise DomainError("no hyperbolic level at this momentum", j=j)
    z, h, _ = maxima[0]
    return z, h


def separatrix_actions(j: float, tol: float = ACTION_TOL):
    """(south, north, outer) reduced actions at the hyperbolic level.

    There Nh = -2 (z - z_s)^2 (z - a)(z - b); the double root is removed
    analytically so both lobes have square-root turning points only.
    """
    jc, zc, hc = cusp_point()
    if abs(j) >= jc:
        raise DomainError("outside the flap momentum range", j=j, j_c=jc)
    zs, hs = hyperbolic_level(j)
    desc = np.array(level_quartic(j, hs)[::-1])
    q, _ = np.polydiv(desc, np.array([1.0, -2 * zs, zs * zs]))
    a, b = _snap_poles(sorted(np.roots(q).real), j)
    return _lobe_pair(zs, a, b, tol)


def _lobe_pair(zs, a, b, tol, power=1):
    def south(t, da, db):
        return (db**power) * np.sqrt(2.0 * da * (b - t)) / _den(t, da, db, a, zs)

    def north(t, da, db):
        return (da**power) * np.sqrt(2.0 * (t - a) * db) / _den(t, da, db, zs, b)

    s = tanh_sinh(south, a, zs, tol) / math.pi
    n = tanh_sinh(north, zs, b, tol) / math.pi if b > zs else 0.0
    return s, n, s + n


def cusp_actions(sign: int = 1, tol: float = ACTION_TOL):
    """Reduced actions at a cusp, where Nh has a triple root z_c."""
    jc, zc, hc = cusp_point()
    desc = np.array(level_quartic(sign * jc, hc)[::-1])
    q, _ = np.polydiv(desc, (np.poly1d([1.0, -zc]) ** 3).coeffs)
    a = -q[1] / q[0]

    def south(t, da, db):
        return np.sqrt(2.0 * da * db**3) / (1.0 - t * t)

    s = tanh_sinh(south, a, zc, tol) / math.pi
    return s, 0.0, s


# -- flap geometry -------------------------------------------------------------------------


@dataclass(frozen=True)
class FlapGeometry:
    """Edge actions of the flap and the affine images they bound.

    ``S1 = A_south`` and ``S2 = A_outer + max(0, lam)`` where A are reduced
    actions at the hyperbolic level; the flap action is
    ``I = A_north + max(0, lam)``.  ``normalization`` records an applied map
    ``I -> sign*I + k*J + const``.
    """

    lam: tuple
    S1: tuple
    S2: tuple
    lam1: float
    lam2: float
    normalization: tuple = (1, 0, 0.0)

    def arrays(self):
        return np.array(self.lam), np.array(self.S1), np.array(self.S2)

    def _apply(self, lower, upper):
        sign, k, const = self.normalization
        lam = np.array(self.lam)
        if sign > 0:
            return lower + k * lam + const, upper + k * lam + const
        return -upper + k * lam + const, -lower + k * lam + const

    def hole(self):
        """Boundary curves (lower, upper) of the removed strip in the flap-base image."""
        lam, S1, S2 = self.arrays()
        return self._apply(np.maximum(0.0, lam) + S1, S2)

    def flap_image(self):
        """Boundary curves (lower, upper) of the flap's (I, J)-image."""
        lam, S1, S2 = self.arrays()
        return self._apply(np.maximum(0.0, lam), S2 - S1)

    def transformed(self, sign: int, k: int, const: float) -> "FlapGeometry":
        s0, k0, c0 = self.normalization
        # compose: I -> sign*(s0*I + k0*J + c0) + k*J + const
        new = (sign * s0, sign * k0 + k, sign * c0 + const)
        return FlapGeometry(self.lam, self.S1, self.S2, self.lam1, self.lam2, new)

    def to_json_obj(self):
        lo, hi = self.flap_image()
        hlo, hhi = self.hole()
        return {
            "lam1": self.lam1,
            "lam2": self.lam2,
            "normalization": {"sign": self.normalization[0], "k": self.normalization[1], "const": self.normalization[2]},
            "lam": list(self.lam),
            "S1": list(self.S1),
            "S2": list(self.S2),
            "flap_image": {"lower": lo.tolist(), "upper": hi.tolist()},
            "base_hole": {"lower": hlo.tolist(), "upper": hhi.tolist()},
        }


def edge_actions(lam: float, tol: float = ACTION_TOL):
    """(S1, S2) at momentum lam inside [lam1, lam2]."""
    jc, _, _ = cusp_point()
    if abs(abs(lam) - jc) < 1e-15:
        s, n, o = cusp_actions(1 if lam > 0 else -1, tol)
    else:
        s, n, o = separatrix_actions(lam, tol)
    return s, o + max(0.0, lam)


def flap_geometry(
    diagram: BifurcationDiagram, resolution: int = 65, tol: float = ACTION_TOL, threads: int = 1
) -> FlapGeometry:
    if not diagram.has_flap:
        raise DomainError("diagram contains no flap", cusps=len(diagram.cusps))
    lam1, lam2 = diagram.cusps[0][0], diagram.cusps[1][0]
    lams = np.linspace(lam1, lam2, resolution)
    lams[0], lams[-1] = lam1, lam2
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        S1, S2 = zip(*pool.map(lambda l: edge_actions(float(l), tol), lams))
    return FlapGeometry(tuple(float(v) for v in lams), tuple(S1), tuple(S2), float(lam1), float(lam2))


def flap_height(lam: float, tol: float = ACTION_TOL) -> float:
    s1, s2 = edge_actions(lam, tol)
    return s2 - s1


def endpoint_second_differences(which: int, at: int, steps: int = 12, span: float | None = None):
    """Second differences of S_which approaching lam_at on a dyadic sequence.

    Returns a list of (delta, D2) with D2 = (S(l+2d) - 2S(l+d) + S(l)) / d^2,
    d measured into the interval from the endpoint.
    """
    jc, _, _ = cusp_point()
    lam0 = -jc if at == 1 else jc
    inward = 1.0 if at == 1 else -1.0
    span = span or 0.25 * jc
    S0 = edge_actions(lam0)[which - 1]
    out = []
    for k in range(steps):
        d = span * 2.0**-k
        s1 = edge_actions(lam0 + inward * d)[which - 1]
        s2 = edge_actions(lam0 + inward * 2 * d)[which - 1]
        out.append((d, (s2 - 2 * s1 + S0) / (d * d)))
    return out


def diverges_monotonically(seq, last: int = 5) -> bool:
    vals = [v for _, v in seq][-last - 1 :]
    return all(b > a for a, b in zip(vals, vals[1:])) and vals[-1] > 0


def quarter_exponent_fit(fun, lam0: float, inward: float, deltas, step_ratio: float = 0.05):
    """Fit d/dlam fun(lam0 + inward*d) = a + a' d^p (+ b d^(1/2)); returns (a, a', p).

    Derivatives by central differences with step ``step_ratio * d``.
    """
    deltas = np.asarray(deltas, dtype=float)
    D = []
    for d in deltas:
        e = step_ratio * d
        lam = lam0 + inward * d
        D.append(inward * (fun(lam + inward * e) - fun(lam - inward * e)) / (2 * e))
    D = np.array(D)

    def model(d, a, a1, p):
        return a + a1 * d**p

    p0 = (float(D[0]), float((D[-1] - D[0]) / (deltas[-1] ** 0.25 - deltas[0] ** 0.25 + 1e-300)), 0.25)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # covariance is undefined for near-exact fits
        popt, _ = curve_fit(model, deltas, D, p0=p0, maxfev=20000)
    return float(popt[0]), float(popt[1]), float(popt[2])


# -- affine comparison ---------------------------------------------------------------------


@dataclass(frozen=True)
class AffineDecision:
    equivalent: bool
    witness: tuple | None  # (sign, k, const)
    distance: float
    separating_feature: dict | None = None
    k_bound: int = K_BOUND

    def to_json_obj(self):
        out = {"equivalent": self.equivalent, "distance": self.distance, "k_bound": self.k_bound}
        if self.witness is not None:
            out["witness"] = {"sign": self.witness[0], "k": self.witness[1], "const": self.witness[2]}
        if self.separating_feature is not None:
            out["separating_feature"] = self.separating_feature
        return out


def affine_equivalent(a: FlapGeometry, b: FlapGeometry, tol: float = 1e-9) -> AffineDecision:
    """Search I -> sign*I + k*J + const (|k| <= 8) mapping a's images onto b's."""
    la, lb = np.array(a.lam), np.array(b.lam)
    if la.shape != lb.shape or np.max(np.abs(la - lb)) > tol * (1 + np.max(np.abs(la))):
        raise DomainError("incomparable lam ranges", a=[float(la[0]), float(la[-1])], b=[float(lb[0]), float(lb[-1])])
    lam = la
    a_lo, a_hi = a.hole()
    b_lo, b_hi = b.hole()
    af_lo, af_hi = a.flap_image()
    bf_lo, bf_hi = b.flap_image()
    best = (math.inf, None)
    for sign in (1, -1):
        for k in range(-K_BOUND, K_BOUND + 1):
            if sign > 0:
                lo, hi = a_lo + k * lam, a_hi + k * lam
                flo, fhi = af_lo + k * lam, af_hi + k * lam
            else:
                lo, hi = -a_hi + k * lam, -a_lo + k * lam
                flo, fhi = -af_hi + k * lam, -af_lo + k * lam
            const = float(np.mean(np.concatenate([b_lo - lo, b_hi - hi])))
            dist = max(
                float(np.max(np.abs(lo + const - b_lo))),
                float(np.max(np.abs(hi + const - b_hi))),
                float(np.max(np.abs(flo + const - bf_lo))),
                float(np.max(np.abs(fhi + const - bf_hi))),
            )
            if dist < best[0]:
                best = (dist, (sign, k, const))
    dist, witness = best
    scale = 1.0 + float(np.max(np.abs(np.concatenate([b_lo, b_hi]))))
    if dist <= tol * scale:
        return AffineDecision(True, witness, dist)
    height_a = a_hi - a_lo
    height_b = b_hi - b_lo
    feature = {
        "kind": "height-profile",
        "max_difference": float(np.max(np.abs(height_a - height_b))),
        "at_lam": float(lam[int(np.argmax(np.abs(height_a - height_b)))]),
    }
    return AffineDecision(False, None, dist, feature)


# -- exports ------------------------------------------------------------------------------


def diagram_csv(d: BifurcationDiagram) -> str:
    lines = ["branch,j,h"]
    for name in BRANCH_NAMES:
        for j, h in sorted(d.branches[name]):
            lines.append(f"{name},{fmt(j)},{fmt(h)}")
    return "\n".join(lines) + "\n"


def cusps_csv(d: BifurcationDiagram) -> str:
    lines = ["j,h,z"] + [f"{fmt(j)},{fmt(h)},{fmt(z)}" for j, h, z in d.cusps]
    return "\n".join(lines) + "\n"


def flap_csv(g: FlapGeometry) -> str:
    lo, hi = g.flap_image()
    hlo, hhi = g.hole()
    lines = ["lam,S1,S2,flap_lower,flap_upper,hole_lower,hole_upper"]
    for row in zip(g.lam, g.S1, g.S2, lo, hi, hlo, hhi):
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _svg_polyline(points, sx, sy, color, width=1.5):
    pts = " ".join(f"{sx(x):.3f},{sy(y):.3f}" for x, y in points)
    return f'<polyline fill="none" stroke="{color}" stroke-width="{width}" points="{pts}"/>'


def _frame(xs, ys, w=640, hgt=480, pad=50):
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    dx = (x1 - x0) or 1.0
    dy = (y1 - y0) or 1.0
    sx = lambda x: pad + (x - x0) / dx * (w - 2 * pad)  # noqa: E731
    sy = lambda y: hgt - pad - (y - y0) / dy * (hgt - 2 * pad)  # noqa: E731
    return sx, sy


def _svg_doc(body, title, stamp, w=640, hgt=480):
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{hgt}" viewBox="0 0 {w} {hgt}">\n'
        f"<title>{title}</title>\n<desc>{stamp}</desc>\n"
        f'<rect x="0" y="0" width="{w}" height="{hgt}" fill="white"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def diagram_svg(d: BifurcationDiagram, stamp: str = "") -> str:
    """Critical values in the (j, h) plane with cusps and elliptic-elliptic points."""
    pts = [p for v in d.branches.values() for p in v]
    sx, sy = _frame([p[0] for p in pts], [p[1] for p in pts])
    colors = {"south-min": "#1f77b4", "barrier-max": "#d62728", "north-min": "#2ca02c"}
    body = []
    for name, branch in d.branches.items():
        if name == "north-min":
            # draw the two sides of the vertex separately
            for side in (lambda j: j <= 0, lambda j: j >= 0):
                seg = sorted(p for p in branch if side(p[0]))
                if len(seg) > 1:
                    body.append(_svg_polyline(seg, sx, sy, colors[name]))
        elif name == "south-min":
            seg = sorted(branch)
            body.append(_svg_polyline(seg, sx, sy, colors[name]))
        else:
            seg = sorted(branch)
            if len(seg) > 1:
                body.append(_svg_polyline(seg, sx, sy, colors[name]))
    for j, h, _ in d.cusps:
        body.append(f'<circle cx="{sx(j):.3f}" cy="{sy(h):.3f}" r="4" fill="black"/>')
    for j, h, _ in d.ee_points:
        body.append(f'<rect x="{sx(j) - 4:.3f}" y="{sy(h) - 4:.3f}" width="8" height="8" fill="orange"/>')
    return _svg_doc(body, "Bifurcation diagram of the quadratic spherical pendulum", stamp)


def flap_svg(g: FlapGeometry, stamp: str = "") -> str:
    """Flap image (I, J) and the removed strip of the flap-base image."""
    lam = np.array(g.lam)
    lo, hi = g.flap_image()
    hlo, hhi = g.hole()
    ys = np.concatenate([lo, hi, hlo, hhi])
    sx, sy = _frame(list(lam), list(ys))
    body = [
        _svg_polyline(list(zip(lam, lo)), sx, sy, "#2ca02c"),
        _svg_polyline(list(zip(lam, hi)), sx, sy, "#d62728"),
        _svg_polyline(list(zip(lam, hlo)), sx, sy, "#1f77b4"),
        _svg_polyline(list(zip(lam, hhi)), sx, sy, "#9467bd"),
    ]
    return _svg_doc(body, "Flap image and flap-base strip", stamp)
