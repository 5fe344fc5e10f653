"""Explicit solutions of the transport equation ``{u, H} = g`` and their checks.

For ``H = x^2 + F(y)`` a level component is the graph ``x = sigma sqrt(P(t))``
with ``P = h - F``, so along it ``u`` is a 1-D integral.  Three initial
conditions are offered:

* ``"x=0"``: u vanishes on the y-axis; the integral runs from the axis
  crossing ``f`` (found by following the level in the -y direction) up to y.
* ``"y=0"``: u vanishes on the x-axis.
* ``"x=-eps"`` (Cusp only): u vanishes on the section ``x = -eps`` and the
  integral runs in x along ``y = cbrt(x^2 - h)``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp

from .actions import saddle_level, vanishing_cycle_action
from .errors import ChartEscape, DomainError, HypothesisViolated
from .hamiltonians import ModelHamiltonian, real_roots, trace_to_axis
from .moves import bracket
from .powerseries import TruncatedSeries
from .quadrature import density_function, tanh_sinh

ICS = ("x=0", "y=0", "x=-eps", "auto")
QUAD_TOL = 1e-14


def _P_coeffs(model: ModelHamiltonian, h: float, lam: float):
    c = [-v for v in model.f_coeffs(lam)]
    c[0] += h
    return c


def _deflate(coeffs_asc, root):
    """Ascending coefficients of P(t) / (t - root)."""
    desc = list(reversed(coeffs_asc))
    out = [desc[0]]
    for c in desc[1:-1]:
        out.append(c + root * out[-1])
    return list(reversed(out))


def _horner(coeffs_asc, t):
    acc = np.zeros_like(t)
    for c in reversed(coeffs_asc):
        acc = acc * t + c
    return acc


class TransportSolution:
    """Evaluator of u with ``u_x H_y - u_y H_x = g``."""

    def __init__(self, model, g, ic: str = "auto", eps: float = 0.5, tol: float = QUAD_TOL, label: str = ""):
        self.model = ModelHamiltonian.parse(model)
        if ic not in ICS:
            raise DomainError(f"unknown initial condition {ic!r}", choices=list(ICS))
        if ic == "x=-eps" and self.model is not ModelHamiltonian.Cusp:
            raise DomainError("the x = -eps condition is implemented for the Cusp model")
        self.g = g
        self._f = density_function(g)
        self.ic = ic
        self.eps = float(eps)
        self.tol = tol
        self.label = label or str(g)
        self._zero = isinstance(g, TruncatedSeries) and g.is_zero()
        self._cache: dict = {}
        self._lock = threading.Lock()

    def describe(self):
        return {"model": self.model.value, "ic": self.ic, "eps": self.eps, "density": self.label}

    def method_for(self, x, y, lam=0.0) -> str:
        if self.ic != "auto":
            return self.ic
        if self.model is ModelHamiltonian.Hyperbolic and float(self.model.H(x, y)) > 0:
            return "y=0"
        return "x=0"

    def __call__(self, x, y, lam=0.0):
        scalar = np.ndim(x) == 0 and np.ndim(y) == 0 and np.ndim(lam) == 0
        xs, ys, ls = (np.atleast_1d(np.asarray(v, dtype=float)) for v in np.broadcast_arrays(x, y, lam))
        out = self.evaluate_many(xs.ravel(), ys.ravel(), ls.ravel()).reshape(xs.shape)
        return float(out[0]) if scalar else out

    def evaluate_many(self, xs, ys, ls):
        n = len(xs)
        out = np.zeros(n)
        if self._zero:
            return out
        todo = []
        with self._lock:
            for i in range(n):
                key = (xs[i], ys[i], ls[i])
                if key in self._cache:
                    out[i] = self._cache[key]
                else:
                    todo.append(i)
        groups: dict[str, list[int]] = {}
        for i in todo:
            groups.setdefault(self.method_for(xs[i], ys[i], ls[i]), []).append(i)
        for method, idx in groups.items():
            idx = np.array(idx)
            if method == "x=0":
                vals = self._from_axis(xs[idx], ys[idx], ls[idx])
            elif method == "y=0":
                vals = self._from_x_axis(xs[idx], ys[idx], ls[idx])
            else:
                vals = np.array([self._from_section(xs[i], ys[i]) for i in idx])
            out[idx] = vals
        with self._lock:
            for i in todo:
                self._cache[(xs[i], ys[i], ls[i])] = out[i]
        return out

    # -- u = -1/2 int_f^y g(sigma sqrt P, t) / (sigma sqrt P) dt ------------------

    def _from_axis(self, xs, ys, ls):
        """Integrate from the axis crossing f to y with both turning points removed.

        With P = (t - f)(t - r) w(t) and r the next root beyond y, the change
        t = f + (r - f) sin^2(theta) makes the integrand smooth even when y is
        next to r.  On open arcs (no r) t = f + d v^2 removes the root at f.
        """
        out = np.zeros(len(xs))
        live = np.nonzero(xs != 0.0)[0]
        if live.size == 0:
            return out
        closed, open_ = [], []
        for i in live:
            try:
                f = trace_to_axis(self.model, xs[i], ys[i], ls[i])
            except DomainError:
                # e.g. the lower hyperbolic branch: reach the axis going up
                f = trace_to_axis(self.model, xs[i], ys[i], ls[i], direction=1)
            h = float(self.model.H(xs[i], ys[i], ls[i]))
            q = _deflate(_P_coeffs(self.model, h, ls[i]), f)  # P = (t - f) q
            d = 1.0 if ys[i] > f else -1.0
            beyond = [t for t in real_roots(q) if d * (t - ys[i]) > 0]
            if beyond:
                r = min(beyond, key=lambda t: abs(t - ys[i]))
                w = _deflate(q, r)  # P = (t - f)(t - r) w, and w < 0 on the arc
                closed.append((i, f, d, r, w))
            else:
                open_.append((i, f, d, q))
        gf = self._f
        if closed:
            idx = np.array([c[0] for c in closed])
            f = np.array([c[1] for c in closed])[:, None]
            d = np.array([c[2] for c in closed])[:, None]
            L = np.abs(np.array([c[3] for c in closed])[:, None] - f)
            W = np.zeros((len(closed), 3))
            for k, c in enumerate(closed):
                W[k, : len(c[4])] = c[4]
            sig = np.sign(xs[idx])[:, None]
            lam = ls[idx][:, None]
            top = np.arcsin(np.sqrt(np.clip(np.abs(ys[idx] - f[:, 0]) / L[:, 0], 0.0, 1.0)))

            def smooth_closed(th, da, db):
                sn, cs = np.sin(th), np.cos(th)
                t = f + d * L * sn * sn
                root_w = np.sqrt(np.maximum(-_horner([W[:, j : j + 1] for j in range(3)], t), 0.0))
                X = sig * L * sn * cs * root_w
                return 2.0 * d * gf(X, t, lam) / (sig * root_w)

            out[idx] = -0.5 * tanh_sinh(smooth_closed, np.zeros(len(closed)), top, self.tol)
        if open_:
            idx = np.array([c[0] for c in open_])
            f = np.array([c[1] for c in open_])[:, None]
            d = np.array([c[2] for c in open_])[:, None]
            Q = np.zeros((len(open_), 3))
            for k, c in enumerate(open_):
                Q[k, : len(c[3])] = c[3]
            sig = np.sign(xs[idx])[:, None]
            lam = ls[idx][:, None]
            top = np.sqrt(np.abs(ys[idx] - f[:, 0]))

            def smooth_open(v, da, db):
                t = f + d * v * v
                root_q = np.sqrt(np.maximum(d * _horner([Q[:, j : j + 1] for j in range(3)], t), 0.0))
                X = sig * v * root_q
                return 2.0 * d * gf(X, t, lam) / (sig * root_q)

            out[idx] = -0.5 * tanh_sinh(smooth_open, np.zeros(len(open_)), top, self.tol)
        return out

    def _from_x_axis(self, xs, ys, ls):
        if np.any(xs == 0.0):
            raise DomainError("the y = 0 condition cannot reach points on the y-axis")
        out = np.zeros(len(xs))
        for k in range(len(xs)):
            h = float(self.model.H(xs[k], ys[k], ls[k]))
            P = _P_coeffs(self.model, h, ls[k])
            lo, hi = sorted((0.0, ys[k]))
            if any(lo <= r <= hi for r in real_roots(P)):
                raise DomainError(
                    "level component does not reach the x-axis", x=float(xs[k]), y=float(ys[k])
                )
        sig = np.sign(xs)[:, None]
        lam = ls[:, None]
        hs = self.model.H(xs, ys, ls)[:, None]
        model, gf = self.model, self._f

        def integrand(t, da, db):
            P = hs - model.F(t, lam)
            X = sig * np.sqrt(P)
            return gf(X, t, lam) / X

        # the integral runs from 0 to y; tanh_sinh needs a <= b
        a = np.minimum(0.0, ys)
        b = np.maximum(0.0, ys)
        vals = tanh_sinh(integrand, a, b, self.tol)
        return -0.5 * np.where(ys >= 0, vals, -vals)

    # -- Cusp: u = int_{-eps}^x g(t, beta) / (-3 beta^2) dt ------------------------

    def _from_section(self, x, y):
        h = float(self.model.H(x, y))
        lo, hi = sorted((-self.eps, float(x)))
        if lo == hi:
            return 0.0
        r = math.sqrt(h) if h > 0 else None
        cuts = [lo]
        if r is not None:
            cuts += [c for c in (-r, r) if lo < c < hi]
        cuts.append(hi)
        gf = self._f
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):

            def piece(t, da, db, a=a, b=b):
                q = t * t - h
                if r is not None:
                    if a == r:
                        q = da * (t + r)
                    elif b == r:
                        q = -db * (t + r)
                    elif a == -r:
                        q = -da * (r - t)
                    elif b == -r:
                        q = db * (r - t)
                beta = np.cbrt(q)
                with np.errstate(divide="ignore", invalid="ignore"):
                    v = gf(t, beta, 0.0) / (-3.0 * beta * beta)
                return np.where(beta != 0, v, 0.0)

            total += tanh_sinh(piece, a, b, self.tol)
        return total if x >= -self.eps else -total


def transport_solve(model, g, ic: str = "auto", eps: float = 0.5) -> TransportSolution:
    return TransportSolution(model, g, ic, eps)


# -- residual checks -----------------------------------------------------------


def _richardson_gradient(fun, x, y, lam, step):
    """Central differences at steps ``step`` and ``step/2`` combined to O(step^4)."""

    def central(d):
        pts_x = np.concatenate([x + d, x - d, x, x])
        pts_y = np.concatenate([y, y, y + d, y - d])
        vals = fun(pts_x, pts_y, np.concatenate([lam] * 4))
        n = len(x)
        return (vals[:n] - vals[n : 2 * n]) / (2 * d), (vals[2 * n : 3 * n] - vals[3 * n :]) / (2 * d)

    ax, ay = central(step)
    bx, by = central(step / 2)
    return (4 * bx - ax) / 3, (4 * by - ay) / 3


def _critical_distance(model: ModelHamiltonian, x, y, lam):
    """Estimate |H - c| / |grad H| of the distance to the nearest critical level c."""
    H = model.H(x, y, lam)
    grad = np.hypot(model.H_x(x, y, lam), model.H_y(x, y, lam))
    out = np.full(len(x), np.inf)
    for i in range(len(x)):
        for px, py in model.critical_points(float(lam[i])):
            c = model.H(px, py, lam[i])
            out[i] = min(out[i], abs(H[i] - c) / max(grad[i], 1e-300))
    return out


def pde_residuals(sol: TransportSolution, points, step: float = 1e-3) -> np.ndarray:
    """|u_x H_y - u_y H_x - g| at each point, derivatives by Richardson differences.

    The stencil shrinks near critical levels so it never straddles a separatrix.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x, y = pts[:, 0], pts[:, 1]
    lam = pts[:, 2] if pts.shape[1] > 2 else np.zeros(len(x))
    m = sol.model
    steps = np.clip(_critical_distance(m, x, y, lam) / 32, 1e-5, step)
    ux, uy = _richardson_gradient(lambda a, b, c: sol(a, b, c), x, y, lam, steps)
    return np.abs(ux * m.H_y(x, y, lam) - uy * m.H_x(x, y, lam) - sol._f(x, y, lam))


def pde_residual(sol: TransportSolution, points, step: float = 1e-3) -> float:
    return float(np.max(pde_residuals(sol, points, step)))


# -- flow of the Hamiltonian field of H for g1 dx^dy ----------------------------------


def _as_u(u):
    if isinstance(u, TransportSolution):
        return lambda x, y, lam: u(x, y, lam)
    if isinstance(u, (ParametricTransport,)):
        return lambda x, y, lam: u(x, y, lam)
    if isinstance(u, TruncatedSeries):
        f = density_function(u)
        return lambda x, y, lam: f(x, y, lam)
    if isinstance(u, (int, float)):
        return lambda x, y, lam: np.full(np.shape(x), float(u))
    return u


def flow_many(g1, model, times, x, y, lam, chart_radius: float = 2.0, rtol: float = 1e-13, atol: float = 1e-15):
    """Flow each point (x_i, y_i) for its own time t_i along X = (-H_y, H_x) / g1.

    With omega = g1 dx^dy this X satisfies omega(X, .) = -dH.  Time is
    rescaled to [0, 1] so all points share one integration.
    """
    model = ModelHamiltonian.parse(model)
    f1 = density_function(g1)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lam = np.broadcast_to(np.asarray(lam, dtype=float), x.shape)
    t = np.broadcast_to(np.asarray(times, dtype=float), x.shape)
    n = len(x)
    h0 = model.H(x, y, lam)

    def rhs(s, z):
        px, py = z[:n], z[n:]
        w = t / f1(px, py, lam)
        return np.concatenate([-model.H_y(px, py, lam) * w, model.H_x(px, py, lam) * w])

    def escape(s, z):
        return chart_radius - np.max(np.abs(z))

    escape.terminal = True
    sol = solve_ivp(rhs, (0.0, 1.0), np.concatenate([x, y]), method="DOP853", rtol=rtol, atol=atol, events=escape)
    if sol.status == 1 or not sol.success:
        raise ChartEscape("flow leaves the chart", radius=chart_radius)
    px, py = sol.y[:n, -1].copy(), sol.y[n:, -1].copy()
    for _ in range(3):  # project back onto the starting level
        gx, gy = model.H_x(px, py, lam), model.H_y(px, py, lam)
        r = (model.H(px, py, lam) - h0) / (gx * gx + gy * gy)
        px -= r * gx
        py -= r * gy
    return px, py


def flow_time_map(g1, model, u, Q, lam: float = 0.0):
    """Phi(Q): flow of H with respect to g1 dx^dy for time u(Q)."""
    uf = _as_u(u)
    x, y = float(Q[0]), float(Q[1])
    t = float(np.asarray(uf(np.array([x]), np.array([y]), np.array([lam]))).ravel()[0])
    if t == 0.0:
        return (x, y)
    px, py = flow_many(g1, model, np.array([t]), np.array([x]), np.array([y]), np.array([lam]))
    return (float(px[0]), float(py[0]))


def pullback_residuals(g0, g1, u, sample, model, step: float = 1e-5) -> np.ndarray:
    """|g1(Phi(Q)) det DPhi(Q) - g0(Q)| with DPhi from Richardson central differences."""
    pts = np.atleast_2d(np.asarray(sample, dtype=float))
    x, y = pts[:, 0], pts[:, 1]
    lam = pts[:, 2] if pts.shape[1] > 2 else np.zeros(len(x))
    n = len(x)
    uf = _as_u(u)
    f0, f1 = density_function(g0), density_function(g1)
    offs = [(0, 0)]
    for d in (step, step / 2):
        offs += [(d, 0), (-d, 0), (0, d), (0, -d)]
    X = np.concatenate([x + a for a, _ in offs])
    Y = np.concatenate([y + b for _, b in offs])
    L = np.concatenate([lam] * len(offs))
    times = np.asarray(uf(X, Y, L), dtype=float)
    PX, PY = flow_many(g1, model, times, X, Y, L)
    PX = PX.reshape(len(offs), n)
    PY = PY.reshape(len(offs), n)

    def jac(k0, d):
        dxx = (PX[k0] - PX[k0 + 1]) / (2 * d)
        dyx = (PY[k0] - PY[k0 + 1]) / (2 * d)
        dxy = (PX[k0 + 2] - PX[k0 + 3]) / (2 * d)
        dyy = (PY[k0 + 2] - PY[k0 + 3]) / (2 * d)
        return dxx, dxy, dyx, dyy

    A = jac(1, step)
    B = jac(5, step / 2)
    a, b, c, d = ((4 * q - p) / 3 for p, q in zip(A, B))
    det = a * d - b * c
    return np.abs(f1(PX[0], PY[0], lam) * det - f0(x, y, lam))


def pullback_residual(g0, g1, u, sample, model, step: float = 1e-5) -> float:
    return float(np.max(pullback_residuals(g0, g1, u, sample, model, step)))


# -- fractional decomposition near the cusp ------------------------------------------


def decomposition_integral(i: int, h: float, eps: float = 1.0, tol: float = 1e-13) -> float:
    """int_{-eps}^{eps} (x^2 - h)^((i-2)/3) dx for h < 0."""
    if h >= 0:
        raise DomainError("need h < 0", h=h)
    p = (i - 2) / 3.0
    return 2.0 * tanh_sinh(lambda t, da, db: (t * t - h) ** p, 0.0, eps, tol)


def singular_exponent(i: int) -> float:
    return (2 * i - 1) / 6.0


def singular_part_fit(h, values, gamma: float, degree: int = 3):
    """Least squares ``value = c (-h)^gamma + poly(h)``; returns (c, residual norm)."""
    h = np.asarray(h, dtype=float)
    v = np.asarray(values, dtype=float)
    if h.size < 8:
        raise DomainError("need at least 8 samples", n=int(h.size))
    if np.any(h >= 0):
        raise DomainError("samples must have h < 0")
    cols = [(-h) ** gamma] + [h**k for k in range(degree + 1)]
    A = np.column_stack(cols)
    rank = np.linalg.matrix_rank(A)
    if rank < A.shape[1]:
        raise DomainError("rank-deficient design matrix", rank=int(rank), columns=A.shape[1])
    # column scaling keeps the solve well conditioned across decades of h
    scale = np.linalg.norm(A, axis=0)
    coef, *_ = np.linalg.lstsq(A / scale, v, rcond=None)
    coef = coef / scale
    resid = float(np.linalg.norm(A @ coef - v))
    return float(coef[0]), resid


# -- parametric transport for the cusp family ------------------------------------------


def hypothesis_grid(n: int = 16, lam_range=(1e-3, 1e-1), theta: float = 0.9):
    """(h, lam) points inside the swallow-tail domain: log-spaced lam, h a fraction of the saddle level."""
    lams = np.logspace(math.log10(lam_range[0]), math.log10(lam_range[1]), n)
    fr = np.linspace(-theta, theta, n)
    return [(float(t * saddle_level(l)), float(l)) for l in lams for t in fr]


def max_vanishing_action(g, grid=None) -> float:
    grid = grid if grid is not None else hypothesis_grid()
    return max(abs(vanishing_cycle_action(g, h, lam)) for h, lam in grid)


@dataclass
class ParametricTransport:
    """u = x a(x^2, y, lam) + remainder solved along levels from the y-axis."""

    g: TruncatedSeries
    N: int
    poly: TruncatedSeries  # x * sum_k a_k x^(2k)
    remainder_density: TruncatedSeries
    remainder: TransportSolution
    hypothesis_action: float | None = None
    _poly_f: object = field(default=None, repr=False)

    def __post_init__(self):
        self._poly_f = density_function(self.poly)
        self.model = ModelHamiltonian.CuspFamily
        self._f = density_function(self.g)

    def __call__(self, x, y, lam):
        return self._poly_f(x, y, lam) + self.remainder(x, y, lam)

    def describe(self):
        return {
            "N": self.N,
            "polynomial_part": self.poly.to_string(),
            "hypothesis_max_action": self.hypothesis_action,
            "remainder": self.remainder.describe(),
        }


def parametric_transport(g: TruncatedSeries, N: int, check_hypothesis: bool = True, tol: float = 1e-8):
    """Solve {u, x^2 - y^3 + lam y} = g for g even in x with vanishing cycle actions zero.

    The polynomial part solves (2k+1)(lam - 3y^2) a_k = g_k + 2 d/dy a_(k-1)
    for k <= N; what is left is divisible by x^(2N+2) and is transported from
    the y-axis.
    """
    V = ("x", "y", "lam")
    if g.variables != V:
        g = g.rename(V)
    if any(e[0] % 2 for e in g.coefficients):
        raise DomainError("g must be even in x; run kill_odd_part first")
    action = None
    if check_hypothesis:
        action = max_vanishing_action(g)
        if action > tol:
            raise HypothesisViolated(
                "vanishing-cycle action of g is not zero on the swallow-tail grid",
                max_action=action,
                tolerance=tol,
            )
    from .moves import _pivot_divide

    big = 4 * max(g.degree(), 2 * N + 2) + 64
    YL = ("y", "lam")
    gk: dict[int, dict] = {}
    for (i, j, k), c in g.items():
        gk.setdefault(i // 2, {})[(j, k)] = c
    a_prev = TruncatedSeries.zero(YL, big)
    poly = TruncatedSeries.zero(V, big)
    for k in range(N + 1):
        rhs = TruncatedSeries(YL, big, gk.get(k, {})) + a_prev.partial("y", keep_order=True).scale(2)
        q, c = _pivot_divide(rhs)  # rhs = (3y^2 - lam) q + c
        if not c.is_zero():
            raise HypothesisViolated(
                "polynomial part is not divisible by 3y^2 - lam", k=k, remainder=c.to_string()
            )
        ak = q.scale(Fraction(-1, 2 * k + 1))
        poly = poly + ak.rename(V) * TruncatedSeries.monomial(V, big, (2 * k + 1, 0, 0))
        a_prev = ak
    G = g.with_order(big) - bracket(poly, ModelHamiltonian.CuspFamily, big)
    if any(e[0] < 2 * N + 2 for e in G.coefficients):
        raise AssertionError("remainder is not divisible by x^(2N+2)")
    G = G.with_order(max(G.degree(), 0))
    rem = TransportSolution(ModelHamiltonian.CuspFamily, G, ic="x=0", label=G.to_string())
    poly = poly.with_order(max(poly.degree(), 0))
    return ParametricTransport(g, N, poly, G, rem, action)


def separatrix_point(lam: float, y: float):
    """Point (x, y) with x > 0 on the saddle-level curve above the saddle (y > s)."""
    s = math.sqrt(lam / 3.0)
    if not y > s:
        raise DomainError("need y above the saddle", y=y, saddle=s)
    P = (y - s) ** 2 * (y + 2 * s)
    return math.sqrt(P), y


def one_sided_derivatives(fun, base, direction, order: int = 4, step: float = 0.01, npts: int = 9):
    """Derivatives of ``fun`` at ``base`` along ``direction`` from each side.

    A degree ``npts - 1`` polynomial is fitted through samples at
    ``base +- k*step*direction`` (k = 1..npts) and differentiated at 0.
    Returns arrays (minus, plus) of derivatives of orders 0..order.
    """
    base = np.asarray(base, dtype=float)
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    ks = np.arange(1, npts + 1) * step
    out = []
    for side in (-1.0, 1.0):
        s = side * ks
        pts = base[None, :] + s[:, None] * direction[None, :]
        vals = np.asarray(fun(pts[:, 0], pts[:, 1], pts[:, 2]), dtype=float)
        # interpolating polynomial in the scaled variable s/step
        coef = np.polynomial.polynomial.polyfit(s / step, vals, npts - 1)
        ders = [math.factorial(k) * coef[k] / step**k for k in range(order + 1)]
        out.append(np.array(ders))
    return out[0], out[1]


def continuity_report(u, lam: float = 0.3, ys=(0.45, 0.55), order: int = 4, step: float = 0.01, npts: int = 9):
    """Jumps of one-sided derivatives across the separatrix surface {3f^2 = lam}.

    Base points lie on the saddle-level curve above the saddle; directions are
    the x, y and lam axes.  Returns a JSON-ready dict with ``max_jump``.
    """
    rows = []
    for y in ys:
        x, _ = separatrix_point(lam, y)
        for name, d in (("x", (1, 0, 0)), ("y", (0, 1, 0)), ("lam", (0, 0, 1))):
            minus, plus = one_sided_derivatives(u, (x, y, lam), d, order, step, npts)
            jump = np.abs(plus - minus)
            rows.append({"point": [x, y, lam], "direction": name, "jumps": [float(v) for v in jump]})
    max_jump = max(max(r["jumps"]) for r in rows)
    return {"order": order, "rows": rows, "max_jump": max_jump}
