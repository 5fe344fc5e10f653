"""Symplectic u-moves and exact normal-form reductions.

Sign convention (used everywhere): a move by ``u`` replaces the density
``g`` with ``g - {u, H}`` where ``{u, H} = u_x H_y - u_y H_x``.  All generator
coefficients below are computed from this bracket rather than hard-coded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError, TruncationError, VariableMismatch
from .hamiltonians import ModelHamiltonian
from .powerseries import TruncatedSeries


@dataclass(frozen=True)
class Density:
    g: TruncatedSeries
    A: TruncatedSeries | None = None
    B: TruncatedSeries | None = None

    @classmethod
    def parse(cls, text: str, variables=("x", "y"), order: int = 12) -> "Density":
        return cls(TruncatedSeries.parse(text, variables, order))

    def with_g(self, g: TruncatedSeries) -> "Density":
        return Density(g, self.A, self.B)


def bracket(u: TruncatedSeries, model, order: int | None = None) -> TruncatedSeries:
    """``u_x H_y - u_y H_x`` computed exactly, then truncated at ``order`` (default u.order)."""
    model = ModelHamiltonian.parse(model)
    if "x" not in u.variables or "y" not in u.variables:
        raise VariableMismatch("moves need variables x and y", variables=list(u.variables))
    order = u.order if order is None else order
    ue = u.exact()
    H = model.series(u.variables, ue.order)
    out = ue.partial("x", keep_order=True) * H.partial("y", keep_order=True) - ue.partial(
        "y", keep_order=True
    ) * H.partial("x", keep_order=True)
    return out.with_order(max(out.order, order)).truncate(order)


@dataclass(frozen=True)
class MoveRecord:
    u: TruncatedSeries
    model: ModelHamiltonian
    before: Density
    after: Density

    def to_json_obj(self):
        return {
            "model": self.model.value,
            "u": self.u.to_json_obj(),
            "before": self.before.g.to_json_obj(),
            "after": self.after.g.to_json_obj(),
        }


def apply_move(d: Density, u: TruncatedSeries, model) -> MoveRecord:
    model = ModelHamiltonian.parse(model)
    if u.variables != d.g.variables:
        raise VariableMismatch("u and g have different variables", u=list(u.variables), g=list(d.g.variables))
    new_g = d.g - bracket(u, model, d.g.order)
    return MoveRecord(u, model, d, d.with_g(new_g.with_order(d.g.order)))


def move_identity_defect(rec: MoveRecord) -> TruncatedSeries:
    """after - before + {u, H}; zero for every valid record."""
    order = rec.before.g.order
    return rec.after.g - rec.before.g + bracket(rec.u, rec.model, order)


# -- odd part ---------------------------------------------------------------------


def kill_odd_part(d: Density, model) -> tuple[Density, TruncatedSeries]:
    """Remove the odd-in-x part of g by one move.

    For ``H = x^2 + F(y)`` and odd part ``x g1(x^2, y)`` the generator is
    ``u = U(H, y)`` with ``U(h, y) = -1/2 int_0^y g1(h - F(t), t) dt``;
    indeed ``{U(H, y), H} = -2x U_y = x g1``.
    """
    model = ModelHamiltonian.parse(model)
    g = d.g
    V = g.variables
    _, odd = g.parity_split("x")
    if odd.is_zero():
        return d, TruncatedSeries.zero(V, g.order)
    ix = V.index("x")
    W = tuple(V) + ("h",)
    big = 4 * g.degree() + 64
    # h - F(y) over W, with y standing in for the integration variable t
    x2 = TruncatedSeries.var("x", W, big) ** 2
    X = TruncatedSeries.var("h", W, big) - model.series(V, big).rename(W) + x2
    integrand = TruncatedSeries.zero(W, big)
    powers = {}
    for e, c in odd.items():
        k = (e[ix] - 1) // 2
        if k not in powers:
            powers[k] = X**k
        rest = [0] * len(W)
        for i, v in enumerate(e):
            if i != ix:
                rest[i] = v
        integrand = integrand + TruncatedSeries.monomial(W, big, rest, c) * powers[k]
    U = integrand.integrate("y").scale(Fraction(-1, 2)).with_order(big)
    H = model.series(V, big).rename(W)
    u = U.substitute("h", H).rename(V).truncate(g.order)
    rec = apply_move(d, u, model)
    new = rec.after.g
    if not new.parity_split("x")[1].is_zero():
        raise AssertionError("odd part survived the move")
    return rec.after, u


# -- generic greedy engine ----------------------------------------------------------


@dataclass
class Transcript:
    model: ModelHamiltonian
    steps: list = field(default_factory=list)  # (target exponent, generator exponent, coefficient)

    def to_json_obj(self):
        return {
            "model": self.model.value,
            "steps": [
                {"target": list(t), "generator": list(gen), "num": c.numerator, "den": c.denominator}
                for t, gen, c in self.steps
            ],
        }

    def to_json(self):
        return json.dumps(self.to_json_obj(), sort_keys=True)


def replay(transcript: Transcript, d: Density) -> tuple[Density, TruncatedSeries]:
    """Apply the recorded generator moves in order."""
    V = d.g.variables
    cur = d
    total = TruncatedSeries.zero(V, d.g.order)
    for _, gen, c in transcript.steps:
        u = TruncatedSeries.monomial(V, d.g.order, gen, c)
        cur = apply_move(cur, u, transcript.model).after
        total = total + u
    return cur, total


def _greedy(d: Density, model, pick) -> tuple[Density, TruncatedSeries, Transcript]:
    """Repeatedly kill the target chosen by ``pick(g) -> (target, generator) | None``."""
    V = d.g.variables
    g = d.g
    u_total = TruncatedSeries.zero(V, g.order)
    tr = Transcript(model)
    for _ in range(100000):
        choice = pick(g)
        if choice is None:
            return d.with_g(g), u_total, tr
        target, gen = choice
        mono = TruncatedSeries.monomial(V, g.order, gen, 1)
        alpha = bracket(mono.with_order(sum(gen) + 8), model, sum(target)).coefficient(target)
        if alpha == 0:
            raise AssertionError(f"generator {gen} does not reach {target}")
        coef = g.coefficient(target) / alpha
        step = mono.scale(coef)
        g = (g - bracket(step, model, g.order)).with_order(g.order)
        if g.coefficient(target) != 0:
            raise AssertionError("greedy step failed to clear its target")
        u_total = u_total + step
        tr.steps.append((target, gen, coef))
    raise AssertionError("reduction did not terminate")


def elliptic_reduce(d: Density, n: int, model=ModelHamiltonian.Elliptic):
    """Push x^(2j) y^(2i) (j >= 1, i <= n) toward pure y-powers.

    Generator ``x^(2j-1) y^(2i+1)`` turns ``x^(2j) y^(2i)`` into a multiple of
    ``x^(2j-2) y^(2i+2)``, preserving total degree.  Returns
    ``(density, u, transcript)``.
    """
    model = ModelHamiltonian.parse(model)
    if model not in (ModelHamiltonian.Elliptic, ModelHamiltonian.Hyperbolic):
        raise DomainError("elliptic_reduce handles Elliptic and Hyperbolic models")
    g = d.g
    V = g.variables
    ix, iy = V.index("x"), V.index("y")
    if any(e[ix] % 2 or e[iy] % 2 for e in g.coefficients):
        raise DomainError("g must be even in x and y")
    need = 2 * (n + 1) + 2 * (n + 2)
    if g.order < need:
        raise TruncationError("truncation order too low", order=g.order, required=need)

    def pick(g):
        targets = [e for e in g.coefficients if e[ix] >= 2 and e[iy] <= 2 * n]
        if not targets:
            return None
        t = max(targets, key=lambda e: (e[ix], e))
        gen = list(t)
        gen[ix] -= 1
        gen[iy] += 1
        return t, tuple(gen)

    return _greedy(d, model, pick)


def cusp_reduce(d: Density, n: int):
    """Reduce an even-in-x density for x^2 - y^3 to sum d_i y^i + O(y^(n+1)), d_(2+3k) = 0.

    Class ``i = 2 mod 3`` monomials x^(2j) y^i are removed by the generator
    x^(2j+1) y^(i-2) (side effect on x^(2j+2) y^(i-3), lower degree); the
    pure y^2 case uses the generator x.  Other monomials with j >= 1 are moved
    to x^(2j-2) y^(i+3) by the generator x^(2j-1) y^(i+1).
    Returns ``(density, u, transcript)``.
    """
    model = ModelHamiltonian.Cusp
    g = d.g
    V = g.variables
    if "lam" in V and g.depends_on("lam"):
        raise DomainError("cusp_reduce expects a density in x, y only")
    ix, iy = V.index("x"), V.index("y")
    if any(e[ix] % 2 for e in g.coefficients):
        raise DomainError("g must be even in x; run kill_odd_part first")
    if g.order < n:
        raise TruncationError("truncation order too low", order=g.order, required=n)

    def pick(g):
        c2 = [e for e in g.coefficients if e[iy] <= n and e[iy] % 3 == 2]
        if c2:
            t = max(c2, key=lambda e: (e[iy], e))
            gen = list(t)
            gen[ix] += 1
            gen[iy] -= 2
            return t, tuple(gen)
        rest = [e for e in g.coefficients if e[iy] <= n and e[ix] >= 2]
        if rest:
            t = max(rest, key=lambda e: (e[ix], e))
            gen = list(t)
            gen[ix] -= 1
            gen[iy] += 1
            return t, tuple(gen)
        return None

    return _greedy(d, model, pick)


# -- parabolic c-invariant ----------------------------------------------------------


@dataclass(frozen=True)
class CInvariant:
    b: TruncatedSeries
    c: TruncatedSeries
    sign: int
    R: float
    bound_holds: bool
    metadata: dict = field(default_factory=dict)

    def to_json_obj(self):
        return {
            "b": self.b.to_string(),
            "c": self.c.to_string(),
            "sign": self.sign,
            "growth_R": self.R,
            "growth_bound_holds": self.bound_holds,
            "b_series": self.b.to_json_obj(),
            "c_series": self.c.to_json_obj(),
            "metadata": self.metadata,
        }


def _split_lam_poly(p: TruncatedSeries):
    """Coefficients (in y-only series) of powers of lam of a (y, lam) series."""
    out: dict[int, dict] = {}
    for (i, j), c in p.items():
        out.setdefault(j, {})[(i,)] = c
    return {j: TruncatedSeries(("y",), p.order, cs) for j, cs in out.items()}


def _pivot_divide(p: TruncatedSeries):
    """Write p(y, lam) = (3y^2 - lam) q + c(y) exactly; return (q, c)."""
    YL = ("y", "lam")
    order = p.order
    r = TruncatedSeries.monomial(("y",), order, (2,), 3)  # pivot lam = 3y^2
    coeffs = _split_lam_poly(p)
    c = TruncatedSeries.zero(("y",), order)
    for j, pj in coeffs.items():
        c = c + pj * r**j
    # p(lam) - p(r) = (lam - r) * sum_j p_j sum_a lam^a r^(j-1-a)
    q = TruncatedSeries.zero(YL, order)
    lam = TruncatedSeries.var("lam", YL, order)
    rY = r.rename(YL)
    for j, pj in coeffs.items():
        pjY = pj.rename(YL)
        for a in range(j):
            q = q + pjY * lam**a * rY ** (j - 1 - a)
    q = -q  # divide by (3y^2 - lam) = -(lam - r)
    pivot = TruncatedSeries.parse("3*y^2 - lam", YL, order)
    if (pivot * q + c.rename(YL)) != p:
        raise AssertionError("pivot division left a remainder")
    return q, c


def parabolic_c_recursion(d: Density, order: int | None = None) -> CInvariant:
    """Solve g_k - 2 d/dy b_(k-1) = (2k+1)(3y^2 - lam) b_k + c_k for k = 0, 1, ...

    The associated move is ``u = -x b(x^2, y, lam)`` and
    ``g = c + {-x b, H}`` holds within truncation.  ``c`` depends on the fixed
    coordinates used to write g.
    """
    g = d.g
    if g.variables != ("x", "y", "lam"):
        g = g.rename(("x", "y", "lam"))
    if any(e[0] % 2 for e in g.coefficients):
        raise DomainError("g must be even in x")
    N = g.order if order is None else order
    big = 4 * max(g.degree(), N) + 64
    YL = ("y", "lam")
    gk: dict[int, dict] = {}
    for (i, j, k), cf in g.items():
        gk.setdefault(i // 2, {})[(j, k)] = cf
    XYL = ("x", "y", "lam")
    b_total = TruncatedSeries.zero(XYL, big)
    c_total = TruncatedSeries.zero(XYL, big)
    b_prev = TruncatedSeries.zero(YL, big)
    for k in range(N // 2 + 1):
        lhs = TruncatedSeries(YL, big, gk.get(k, {})) - b_prev.partial("y", keep_order=True).scale(2)
        q, c = _pivot_divide(lhs)
        bk = q.scale(Fraction(1, 2 * k + 1))
        x2k = TruncatedSeries.monomial(XYL, big, (2 * k, 0, 0))
        b_total = b_total + bk.rename(XYL) * x2k
        c_total = c_total + c.rename(("y",)).rename(XYL) * x2k
        b_prev = bk
    c0 = c_total.coefficient((0, 0, 0))
    sign = -1 if c0 < 0 else 1
    b = b_total.scale(sign).with_order(N).truncate(max(N - 1, 0))
    c = c_total.scale(sign).with_order(N)
    c = c.rename(("x", "y", "lam")).truncate(N)
    c_xy = TruncatedSeries(("x", "y"), N, {(e[0], e[1]): v for e, v in c.items()})
    R, holds = growth_certificate(b)
    return CInvariant(
        b=b,
        c=c_xy,
        sign=sign,
        R=R,
        bound_holds=holds,
        metadata={"coordinate_dependence": "c is unique only for the fixed coordinates (x, y, phi) used to write g"},
    )


def reconstruct_from_c(inv: CInvariant, order: int) -> TruncatedSeries:
    """sign * (c + {-x b, H}) over (x, y, lam), truncated at ``order``."""
    XYL = ("x", "y", "lam")
    c = inv.c.rename(XYL).with_order(order)
    xb = TruncatedSeries.var("x", XYL, order + 1) * inv.b.with_order(order + 1)
    out = c + bracket(-xb, ModelHamiltonian.CuspFamily, order)
    return out.scale(inv.sign).truncate(order)


def growth_certificate(b: TruncatedSeries) -> tuple[float, bool]:
    """Smallest R >= 1 with |b_e| <= R^|e| for all non-constant terms; flag |b_0| <= 1."""
    R = 1.0
    ok = True
    for e, c in b.items():
        deg = sum(e)
        a = abs(float(c))
        if deg == 0:
            ok = a <= 1.0
            continue
        R = max(R, a ** (1.0 / deg))
    return R, ok
