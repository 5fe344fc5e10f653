"""Truncated multivariate power series with exact rational coefficients.

A :class:`TruncatedSeries` is a polynomial in a fixed, ordered tuple of
symbols, known modulo monomials of total degree greater than ``order``.
Values are immutable; every operation returns a new series.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import DomainError, VariableMismatch

# accepted spellings for the parameter symbol when parsing text
ALIASES = {"lambda": "lam", "λ": "lam", "l": "lam"}

Exponent = tuple[int, ...]


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    # sympy Rational and friends
    try:
        return Fraction(int(value.p), int(value.q))
    except AttributeError:
        raise TypeError(f"cannot convert {value!r} to an exact rational") from None


class TruncatedSeries:
    """Sparse polynomial in ``variables`` truncated at total degree ``order``."""

    __slots__ = ("variables", "order", "_coeffs", "_hash")

    def __init__(self, variables: Iterable[str], order: int, coefficients: Mapping | None = None):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise VariableMismatch("repeated variable", variables=list(variables))
        if order < 0:
            raise ValueError("truncation order must be non-negative")
        n = len(variables)
        coeffs: dict[Exponent, Fraction] = {}
        for exp, c in (coefficients or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != n or min(exp, default=0) < 0:
                raise ValueError(f"bad exponent {exp} for variables {variables}")
            if sum(exp) > order:
                continue
            c = _frac(c)
            if c:
                coeffs[exp] = coeffs.get(exp, Fraction(0)) + c
                if not coeffs[exp]:
                    del coeffs[exp]
        self.variables = variables
        self.order = int(order)
        self._coeffs = dict(sorted(coeffs.items()))
        self._hash = None

    # -- construction -------------------------------------------------------

    @classmethod
    def zero(cls, variables, order):
        return cls(variables, order)

    @classmethod
    def constant(cls, value, variables, order):
        variables = tuple(variables)
        return cls(variables, order, {(0,) * len(variables): value})

    @classmethod
    def monomial(cls, variables, order, exponent, coefficient=1):
        return cls(variables, order, {tuple(exponent): coefficient})

    @classmethod
    def var(cls, name, variables, order):
        variables = tuple(variables)
        exp = [0] * len(variables)
        exp[_index(variables, name)] = 1
        return cls(variables, order, {tuple(exp): 1})

    @classmethod
    def parse(cls, text, variables=("x", "y", "lam"), order=12):
        """Parse a polynomial expression such as ``"3*y^2 - lambda"``."""
        import sympy

        variables = tuple(variables)
        expr = text
        if isinstance(text, str):
            # "lambda" is a Python keyword, so aliases are renamed before sympify sees them
            expr = re.sub(r"lambda|\u03bb", "lam", text).replace("^", "**")
        local = {v: sympy.Symbol(v) for v in variables}
        for alias, canon in ALIASES.items():
            if canon in variables and alias.isidentifier():
                local[alias] = local[canon]
        try:
            expr = sympy.sympify(expr, locals=local) if isinstance(expr, str) else expr
            poly = sympy.Poly(sympy.expand(expr), *[local[v] for v in variables])
        except (sympy.SympifyError, sympy.PolynomialError, TypeError, SyntaxError) as exc:
            raise DomainError(f"cannot parse polynomial {text!r}: {exc}", text=str(text)) from None
        coeffs = {}
        for exp, c in poly.terms():
            if not c.is_Rational:
                raise DomainError(f"non-rational coefficient {c} in {text!r}", text=str(text))
            coeffs[exp] = Fraction(int(c.p), int(c.q))
        return cls(variables, order, coeffs)

    # -- basic protocol -----------------------------------------------------

    @property
    def coefficients(self) -> Mapping[Exponent, Fraction]:
        return dict(self._coeffs)

    def items(self):
        return self._coeffs.items()

    def coefficient(self, exponent) -> Fraction:
        return self._coeffs.get(tuple(exponent), Fraction(0))

    def __getitem__(self, exponent):
        return self.coefficient(exponent)

    def __len__(self):
        return len(self._coeffs)

    def is_zero(self):
        return not self._coeffs

    def degree(self):
        return max((sum(e) for e in self._coeffs), default=-1)

    def __eq__(self, other):
        if isinstance(other, TruncatedSeries):
            return (
                self.variables == other.variables
                and self.order == other.order
                and self._coeffs == other._coeffs
            )
        if isinstance(other, (int, Fraction)):
            return self == TruncatedSeries.constant(other, self.variables, self.order)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, self.order, tuple(self._coeffs.items())))
        return self._hash

    def __repr__(self):
        return f"TruncatedSeries({self.to_string()!r}, vars={self.variables}, order={self.order})"

    def to_string(self):
        if not self._coeffs:
            return "0"
        parts = []
        for exp, c in sorted(self._coeffs.items(), key=lambda kv: (sum(kv[0]), kv[0])):
            mono = "*".join(
                v if e == 1 else f"{v}^{e}" for v, e in zip(self.variables, exp) if e
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    __str__ = to_string

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other):
        if self.variables != other.variables:
            raise VariableMismatch(
                "variable sets differ",
                left=list(self.variables),
                right=list(other.variables),
            )

    def _coerce(self, other):
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return TruncatedSeries.constant(other, self.variables, self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        order = min(self.order, other.order)
        out = dict(self._coeffs)
        for e, c in other._coeffs.items():
            out[e] = out.get(e, 0) + c
        return TruncatedSeries(self.variables, order, out)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.variables, self.order, {e: -c for e, c in self._coeffs.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, factor):
        factor = _frac(factor)
        return TruncatedSeries(self.variables, self.order, {e: c * factor for e, c in self._coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        order = min(self.order, other.order)
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self._coeffs.items():
            d1 = sum(e1)
            for e2, c2 in other._coeffs.items():
                if d1 + sum(e2) > order:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return TruncatedSeries(self.variables, order, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not supported")
        result = TruncatedSeries.constant(1, self.variables, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- calculus and structure --------------------------------------------

    def partial(self, var: str, keep_order: bool = False):
        """Formal derivative; the order drops by one unless ``keep_order``."""
        i = _index(self.variables, var)
        out = {}
        for e, c in self._coeffs.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        order = self.order if keep_order else max(self.order - 1, 0)
        return TruncatedSeries(self.variables, order, out)

    def integrate(self, var: str):
        """Antiderivative in ``var`` vanishing at ``var = 0``; order grows by one."""
        i = _index(self.variables, var)
        out = {}
        for e, c in self._coeffs.items():
            ne = list(e)
            ne[i] += 1
            out[tuple(ne)] = c / ne[i]
        return TruncatedSeries(self.variables, self.order + 1, out)

    def parity_split(self, var: str):
        i = _index(self.variables, var)
        even = {e: c for e, c in self._coeffs.items() if e[i] % 2 == 0}
        odd = {e: c for e, c in self._coeffs.items() if e[i] % 2 == 1}
        return (
            TruncatedSeries(self.variables, self.order, even),
            TruncatedSeries(self.variables, self.order, odd),
        )

    def truncate(self, order: int):
        return TruncatedSeries(self.variables, min(order, self.order), self._coeffs)

    def with_order(self, order: int):
        """Relabel the truncation order (raising it treats stored terms as exact)."""
        return TruncatedSeries(self.variables, order, self._coeffs)

    def exact(self):
        """Same terms with an order large enough to make arithmetic untruncated."""
        return self.with_order(max(self.order, 4 * self.degree() + 64))

    def substitute(self, var: str, value: "TruncatedSeries"):
        """Polynomial substitution ``var -> value`` (value over the same variables)."""
        self._check(value)
        i = _index(self.variables, var)
        order = min(self.order, value.order)
        powers = {0: TruncatedSeries.constant(1, self.variables, order)}
        out = TruncatedSeries.zero(self.variables, order)
        for e, c in self._coeffs.items():
            k = e[i]
            if k not in powers:
                powers[k] = value.with_order(order) ** k
            rest = list(e)
            rest[i] = 0
            out = out + TruncatedSeries.monomial(self.variables, order, rest, c) * powers[k]
        return out

    def rename(self, variables):
        """Reorder/extend variables; dropped variables must not occur."""
        variables = tuple(variables)
        out = {}
        for e, c in self._coeffs.items():
            ne = [0] * len(variables)
            for v, k in zip(self.variables, e):
                if k:
                    if v not in variables:
                        raise VariableMismatch(f"variable {v} in use", variable=v)
                    ne[variables.index(v)] = k
            out[tuple(ne)] = c
        return TruncatedSeries(variables, self.order, out)

    def depends_on(self, var: str) -> bool:
        i = _index(self.variables, var)
        return any(e[i] for e in self._coeffs)

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, point: Mapping[str, object]) -> Fraction:
        missing = [v for v in self.variables if v not in point]
        if missing:
            raise DomainError("missing assignment", missing=missing)
        vals = [_frac(point[v]) for v in self.variables]
        total = Fraction(0)
        for e, c in self._coeffs.items():
            term = c
            for v, k in zip(vals, e):
                if k:
                    term *= v**k
            total += term
        return total

    def to_callable(self) -> Callable[..., np.ndarray]:
        """Float64 evaluator taking one array argument per variable."""
        if not self._coeffs:
            return lambda *args: np.zeros(np.broadcast(*args).shape) if args else 0.0
        exps = np.array(list(self._coeffs.keys()), dtype=int)
        coefs = np.array([float(c) for c in self._coeffs.values()])
        nvar = len(self.variables)

        maxpow = exps.max(axis=0)

        def f(*args):
            if len(args) < nvar:
                raise TypeError(f"expected {nvar} arguments, got {len(args)}")
            arrs = np.broadcast_arrays(*[np.asarray(a, dtype=float) for a in args[:nvar]])
            tables = []
            for a, m in zip(arrs, maxpow):
                pw = [np.ones_like(a)]
                for _ in range(m):
                    pw.append(pw[-1] * a)
                tables.append(pw)
            out = np.zeros(arrs[0].shape if arrs else ())
            for c, e in zip(coefs, exps):
                term = None
                for tab, k in zip(tables, e):
                    if k:
                        term = tab[k] if term is None else term * tab[k]
                out = out + (c if term is None else c * term)
            return out

        return f

    # -- serialization ------------------------------------------------------

    def to_json_obj(self):
        return {
            "vars": list(self.variables),
            "order": self.order,
            "terms": [
                {"exp": list(e), "num": c.numerator, "den": c.denominator}
                for e, c in self._coeffs.items()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)

    @classmethod
    def from_json_obj(cls, obj):
        try:
            terms = {tuple(t["exp"]): Fraction(int(t["num"]), int(t.get("den", 1))) for t in obj["terms"]}
            return cls(obj["vars"], int(obj["order"]), terms)
        except (KeyError, TypeError, ZeroDivisionError) as exc:
            raise DomainError(f"malformed series JSON: {exc}") from None

    @classmethod
    def from_json(cls, text: str):
        return cls.from_json_obj(json.loads(text))


def _index(variables, name):
    name = ALIASES.get(name, name)
    try:
        return variables.index(name)
    except ValueError:
        raise VariableMismatch(f"unknown variable {name!r}", variable=name, variables=list(variables)) from None


def series_arith(a: TruncatedSeries, b, op: str) -> TruncatedSeries:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        if not isinstance(b, TruncatedSeries):
            raise TypeError("mul expects a series; use 'scale' for scalars")
        return a * b
    if op == "scale":
        return a.scale(b)
    raise ValueError(f"unknown op {op!r}")


def series_partial(a: TruncatedSeries, var: str) -> TruncatedSeries:
    return a.partial(var)


def parity_split(a: TruncatedSeries, var: str):
    return a.parity_split(var)


def series_eval(a: TruncatedSeries, point) -> Fraction:
    return a.evaluate(point)
