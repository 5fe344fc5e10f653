"""Abel transform linking elliptic actions and the normal-form density.

``I'(h) = (1/2pi) int_0^h f(t) t^(-1/2) (h - t)^(-1/2) dt``

With ``F = 2pi I'`` the unique continuous solution is

``f(t) = F(0)/pi + (sqrt(t)/pi) int_0^t F'(h) (t - h)^(-1/2) dh``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .actions import elliptic_action, fmt
from .errors import ConvergenceError, DomainError
from .quadrature import tanh_sinh

H_MAX = 0.25
GRID_SIZE = 257


@dataclass(frozen=True)
class SampledFunction:
    t: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1 or t.size < 4:
            raise DomainError("need matching 1-D sample arrays with at least 4 points")
        if np.any(np.diff(t) <= 0):
            raise DomainError("sample abscissae must be strictly increasing")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    def spline(self) -> CubicSpline:
        return CubicSpline(self.t, self.values)

    def __call__(self, t):
        return self.spline()(t)

    def to_csv(self, header=("t", "f")) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for a, b in zip(self.t, self.values):
            w.writerow([fmt(a), fmt(b)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SampledFunction":
        rows = list(csv.reader(io.StringIO(text)))[1:]
        return cls(np.array([float(r[0]) for r in rows]), np.array([float(r[1]) for r in rows]))


def abel_forward(f, h: float, tol: float = 1e-12) -> float:
    """I'(h) for a density profile f (callable or :class:`SampledFunction`)."""
    if not h > 0:
        raise DomainError("need h > 0", h=h)
    if isinstance(f, SampledFunction):
        sp = f.spline()
        knots = f.t[(f.t > 0) & (f.t < h)]
        cuts = np.concatenate([[0.0], knots, [h]])
        a, b = cuts[:-1], cuts[1:]

        def integrand(t, da, db):
            left = np.where(a[:, None] == 0.0, da, t)
            right = db + (h - b)[:, None]
            return sp(t) / np.sqrt(left * right)

        return float(np.sum(tanh_sinh(integrand, a, b, tol))) / (2 * math.pi)

    def integrand(t, da, db):
        return np.asarray(f(t), dtype=float) * np.ones_like(t) / np.sqrt(da * db)

    return tanh_sinh(integrand, 0.0, h, tol) / (2 * math.pi)


def _moment(coef_desc, t, a, b):
    """int_a^b p(h) (t - h)^(-1/2) dh for polynomial p (in h - a, highest first), b <= t."""
    # substitute s = t - h; p(h) = q(s) with h - a = (t - a) - s
    p = np.poly1d(coef_desc)
    q = p(np.poly1d([-1.0, t - a]))
    total = 0.0
    lo, hi = t - b, t - a
    for k, c in enumerate(q.coeffs[::-1]):
        e = k + 0.5
        total += c * (hi**e - lo**e) / e
    return total


def _invert_spline(F: CubicSpline, t_eval) -> np.ndarray:
    dF = F.derivative()
    x = F.x
    out = np.empty(len(t_eval))
    F0 = float(F(0.0))
    for n, t in enumerate(t_eval):
        if t <= 0:
            out[n] = F0 / math.pi
            continue
        acc = 0.0
        for i in range(len(x) - 1):
            a, b = x[i], min(x[i + 1], t)
            if a >= t:
                break
            acc += _moment(dF.c[:, i], t, a, b)
        if x[0] > 0:  # extrapolated piece [0, x0]
            acc += _moment(_shift_poly(dF.c[:, 0], x[0]), t, 0.0, min(x[0], t))
        out[n] = (F0 + math.sqrt(t) * acc) / math.pi
    return out


def _shift_poly(coef_desc, shift):
    """Coefficients of p(h - x0) re-expanded about 0, given p in powers of (h - x0)."""
    p = np.poly1d(coef_desc)
    return p(np.poly1d([1.0, -shift])).coeffs


def abel_invert(iprime: SampledFunction, check: bool = True, rel_tol: float = 1e-3) -> SampledFunction:
    """Solve abel_forward(f) = I' on the sample grid.

    F = 2pi I' is replaced by its cubic spline; the inversion integral is then
    exact on every knot interval.  A second inversion from every other sample
    estimates the sensitivity; a large disagreement means the data is too rough.
    """
    t = iprime.t
    F = CubicSpline(t, 2 * math.pi * iprime.values)
    f = _invert_spline(F, t)
    if check and t.size >= 9:
        coarse = CubicSpline(t[::2], 2 * math.pi * iprime.values[::2])
        f2 = _invert_spline(coarse, t[::2])
        gap = float(np.max(np.abs(f2 - f[::2])))
        scale = 1.0 + float(np.max(np.abs(f)))
        if gap > rel_tol * scale:
            raise ConvergenceError(
                "Abel inversion is not resolved by the samples",
                condition_estimate=gap / (scale * np.finfo(float).eps),
                discrepancy=gap,
            )
    return SampledFunction(t, f)


def five_point_derivative(values, step: float) -> np.ndarray:
    """First derivative on a uniform grid: central 5-point interior, one-sided at the ends."""
    v = np.asarray(values, dtype=float)
    n = v.size
    if n < 5:
        raise DomainError("need at least 5 samples")
    d = np.empty(n)
    d[2:-2] = (-v[4:] + 8 * v[3:-1] - 8 * v[1:-3] + v[:-4]) / 12
    d[0] = (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / 12
    d[1] = (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]) / 12
    d[-1] = (25 * v[-1] - 48 * v[-2] + 36 * v[-3] - 16 * v[-4] + 3 * v[-5]) / 12
    d[-2] = (3 * v[-1] + 10 * v[-2] - 18 * v[-3] + 6 * v[-4] - v[-5]) / 12
    return d / step


def elliptic_normal_form_f(g, h_max: float = H_MAX, n: int = GRID_SIZE, tol: float = 1e-13) -> SampledFunction:
    """Normal-form density f of g dx^dy near an elliptic point of x^2 + y^2."""
    hs = np.linspace(0.0, h_max, n)
    I = np.array([0.0] + [elliptic_action(g, h, tol) for h in hs[1:]])
    Ip = five_point_derivative(I, hs[1] - hs[0])
    return abel_invert(SampledFunction(hs, Ip))
