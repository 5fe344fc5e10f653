"""Double-exponential quadrature and iterated integrals over level-bounded regions.

The tanh-sinh rule is written in batched form: one call integrates ``M``
integrals over intervals ``[a_i, b_i]`` on a shared node set.  The integrand
receives the abscissae together with their distances to both endpoints,
computed without cancellation, so factors such as ``(t - a)**(-1/2)`` stay
accurate right up to the endpoint.
"""

from __future__ import annotations

import inspect
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConvergenceError, DomainError
from .powerseries import TruncatedSeries

DEFAULT_TOL = 1e-10
U_MAX = 4.0  # nodes at |u| <= U_MAX; 1 - |x| ~ 1e-37 at the extremes
MAX_LEVEL = 12


@lru_cache(maxsize=None)
def _level_nodes(level: int):
    """Nodes u = k*h (h = 2**-level) added at this level, with weights and endpoint gaps."""
    h = 2.0**-level
    kmax = int(np.floor(U_MAX / h))
    k = np.arange(-kmax, kmax + 1)
    if level > 0:
        k = k[k % 2 != 0]
    u = k * h
    s = 0.5 * np.pi * np.sinh(u)
    em = np.exp(-2.0 * np.abs(s))
    near = 2.0 * em / (1.0 + em)  # gap to the nearer endpoint, on [-1, 1]
    far = 2.0 / (1.0 + em)
    left = np.where(s < 0, near, far)  # 1 + x
    right = np.where(s < 0, far, near)  # 1 - x
    w = 0.5 * np.pi * np.cosh(u) * 4.0 * em / (1.0 + em) ** 2
    for arr in (left, right, w):
        arr.setflags(write=False)
    return left, right, w, h


def tanh_sinh(func: Callable, a, b, tol: float = DEFAULT_TOL, max_level: int = MAX_LEVEL):
    """Integrate ``func(t, t - a, b - t)`` over ``[a, b]``.

    ``a`` and ``b`` may be scalars or equal-length 1-D arrays (a batch).  The
    callable is invoked with arrays of shape ``(M, n)``.  Returns a float for
    scalar input, else an array of length ``M``.
    """
    scalar = np.ndim(a) == 0 and np.ndim(b) == 0
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    half = 0.5 * (b - a)[:, None]
    total = np.zeros(a.shape)
    prev = None
    est = None
    for level in range(max_level + 1):
        left, right, w, h = _level_nodes(level)
        da = half * left
        db = half * right
        t = np.where(left <= right, a[:, None] + da, b[:, None] - db)
        vals = np.asarray(func(t, da, db), dtype=float)
        vals = np.where(w > 0, vals, 0.0)
        total = total + np.sum(vals * w, axis=1)
        est = total * h * half[:, 0]
        if not np.all(np.isfinite(est)):
            raise ConvergenceError("non-finite quadrature estimate", level=level)
        if prev is not None and level >= 3:
            err = np.abs(est - prev)
            if np.all(err <= tol * (1.0 + np.abs(est))):
                break
            if level == max_level:
                bad = int(np.argmax(err))
                raise ConvergenceError(
                    "tanh-sinh did not converge",
                    estimates=[float(prev[bad]), float(est[bad])],
                    index=bad,
                )
        prev = est
    return float(est[0]) if scalar else est


@lru_cache(maxsize=None)
def _gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(func: Callable, a, b, n: int = 40):
    """Gauss-Legendre rule for smooth integrands; ``a``/``b`` broadcast like in :func:`tanh_sinh`.

    Returns an array with the broadcast shape of ``a`` and ``b``; ``func`` gets
    abscissae with a trailing axis of length ``n``.
    """
    x, w = _gl(n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    t = 0.5 * (a + b) + half * x
    return np.sum(np.asarray(func(t)) * w, axis=-1) * half[..., 0]


@dataclass(frozen=True)
class SingularIntegrand:
    """``core(t) * (t - a)**alpha * (b - t)**beta`` on ``[a, b]``."""

    core: Callable
    left_exponent: float = 0.0
    right_exponent: float = 0.0
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if self.left_exponent <= -1 or self.right_exponent <= -1:
            raise DomainError("endpoint exponents must exceed -1")
        if not self.b > self.a:
            raise DomainError("empty or reversed interval", a=self.a, b=self.b)


def integrate_singular(s: SingularIntegrand, tol: float = DEFAULT_TOL) -> float:
    al, be = s.left_exponent, s.right_exponent

    def f(t, da, db):
        out = np.asarray(s.core(t), dtype=float) * np.ones_like(t)
        if al:
            out = out * da**al
        if be:
            out = out * db**be
        return out

    return tanh_sinh(f, s.a, s.b, tol)


# -- densities ---------------------------------------------------------------


def density_function(g) -> Callable:
    """Normalize a density to a vectorized callable ``f(x, y, lam)``.

    Accepts a :class:`TruncatedSeries` in (x, y) or (x, y, lam), a number, or a
    callable of two or three arguments.
    """
    if isinstance(g, TruncatedSeries):
        extra = set(g.variables) - {"x", "y", "lam"}
        if extra:
            raise DomainError("density variables must be drawn from x, y, lam", variables=list(g.variables))
        full = g.rename(("x", "y", "lam")) if g.variables != ("x", "y", "lam") else g
        ev = full.to_callable()
        return lambda x, y, lam=0.0: ev(x, y, lam)
    if isinstance(g, (int, float)):
        c = float(g)
        return lambda x, y, lam=0.0: np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, c)
    if callable(g):
        try:
            nargs = len(inspect.signature(g).parameters)
        except (TypeError, ValueError):
            nargs = 3
        if nargs == 2:
            return lambda x, y, lam=0.0: g(x, y)
        return g
    raise TypeError(f"unsupported density {g!r}")


# -- region integrals --------------------------------------------------------

REGION_KINDS = ("disk", "hyperbolic-quadrant", "cusp-section", "vanishing-loop", "separatrix-lobe")


@dataclass(frozen=True)
class Region:
    """Level-bounded region of one of the model Hamiltonians.

    disk: {x^2 + y^2 <= h}.  hyperbolic-quadrant: {|y| <= x <= sqrt(h + y^2),
    |y| <= eps}, counted negatively (as {sqrt(h+y^2) <= x <= |y|}) for h < 0.
    cusp-section: region between H = 0 and H = h of x^2 - y^3 cut by x = +-eps,
    positive for h < 0.  vanishing-loop: {H <= h} inside the small loop of
    x^2 - y^3 + lam*y.  separatrix-lobe: the same at the saddle level.
    """

    kind: str
    h: float = 0.0
    lam: float = 0.0
    eps: float = 0.5

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise DomainError(f"unknown region kind {self.kind!r}", kinds=list(REGION_KINDS))
        if self.kind in ("hyperbolic-quadrant", "cusp-section") and not self.eps > 0:
            raise DomainError("eps must be positive", eps=self.eps)


class RegionIntegral(NamedTuple):
    value: float
    empty: bool


def integrate_region(g, region: Region, tol: float = DEFAULT_TOL, inner_nodes: int = 40) -> RegionIntegral:
    f = density_function(g)
    lam = float(region.lam)
    kind = region.kind
    n = inner_nodes

    def inner_x(y, lo, hi):
        return gauss_legendre(lambda x: f(x, y[..., None], lam), lo, hi, n)

    def inner_y(x, lo, hi):
        return gauss_legendre(lambda y: f(x[..., None], y, lam), lo, hi, n)

    if kind == "disk":
        h = region.h
        if h <= 0:
            return RegionIntegral(0.0, True)
        r = np.sqrt(h)

        def outer(x, da, db):
            w = np.sqrt(da * db)
            return inner_y(x, -w, w)

        return RegionIntegral(tanh_sinh(outer, -r, r, tol), False)

    if kind == "hyperbolic-quadrant":
        h, eps = region.h, region.eps
        if h == 0:
            return RegionIntegral(0.0, True)
        if h > 0:

            def right(y, da, db):
                return inner_x(y, np.abs(y), np.sqrt(h + y * y))

            val = tanh_sinh(right, -eps, 0.0, tol) + tanh_sinh(right, 0.0, eps, tol)
            return RegionIntegral(float(val), False)
        r = np.sqrt(-h)
        if r >= eps:
            return RegionIntegral(0.0, True)

        def upper(y, da, db):  # y in [r, eps], y - r = da
            return inner_x(y, np.sqrt(da * (y + r)), y)

        def lower(y, da, db):  # y in [-eps, -r], |y| - r = db
            return inner_x(y, np.sqrt(db * (np.abs(y) + r)), np.abs(y))

        val = tanh_sinh(upper, r, eps, tol) + tanh_sinh(lower, -eps, -r, tol)
        return RegionIntegral(-float(val), False)

    if kind == "cusp-section":
        h, eps = region.h, region.eps
        if h == 0:
            return RegionIntegral(0.0, True)
        cuts = [-eps, 0.0, eps]
        r = np.sqrt(h) if h > 0 else None
        if r is not None and r < eps:
            cuts = [-eps, -r, 0.0, r, eps]
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):

            def piece(x, da, db, a=a, b=b):
                q = x * x - h
                if r is not None:
                    if a == r:
                        q = da * (x + r)
                    elif b == r:
                        q = -db * (x + r)
                    elif a == -r:
                        q = -da * (r - x)
                    elif b == -r:
                        q = db * (r - x)
                lo = np.cbrt(x * x)
                return inner_y(x, lo, np.cbrt(q))

            total += tanh_sinh(piece, a, b, tol)
        return RegionIntegral(float(total), False)

    if kind == "vanishing-loop":
        from .hamiltonians import swallowtail_contains, cubic_level_roots

        h = region.h
        if not swallowtail_contains(h, lam):
            raise DomainError("(h, lam) outside the swallow-tail domain", h=h, lam=lam)
        r1, r2, r3 = cubic_level_roots(h, lam)

        def outer(y, da, db):
            w = np.sqrt(da * db * (r3 - y))
            return inner_x(y, -w, w)

        return RegionIntegral(tanh_sinh(outer, r1, r2, tol), False)

    # separatrix-lobe
    if not lam > 0:
        raise DomainError("separatrix lobe needs lam > 0", lam=lam)
    s = np.sqrt(lam / 3.0)

    def lobe(y, da, db):
        w = db * np.sqrt(da)
        return inner_x(y, -w, w)

    return RegionIntegral(tanh_sinh(lobe, -2.0 * s, s, tol), False)
