"""Sparse exact polynomials and rational functions over a differential base field.

A :class:`Polynomial` is a dict from exponent tuples to nonzero coefficients in
``ctx.field``.  Values are treated as immutable once built; every arithmetic
operation returns a fresh, normalized object.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq
from sympy import QQ
from sympy.polys.fields import FracElement
from sympy.polys.rings import PolyElement, ring as _sympy_ring

from .field import QQ_FIELD, BaseField, format_monomial, mpq as _mpq

__all__ = [
    "RingContext",
    "Polynomial",
    "RationalFunction",
    "DerivationSpec",
    "ContextMismatch",
    "poly_arith",
    "partial_derivative",
    "coeff_delta",
    "derivation_apply",
    "evaluate",
    "rf_delta",
    "compose",
    "grevlex_key",
]

_SCALARS = (int, Fraction, type(mpq(0)), FracElement)


class ContextMismatch(ValueError):
    pass


def grevlex_key(exp):
    return (sum(exp), tuple(-e for e in reversed(exp)))


@dataclass(frozen=True)
class RingContext:
    """Ordered variables over a base field Q(params) with delta on the params."""

    vars: tuple
    field: BaseField = QQ_FIELD

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if len(set(self.vars)) != len(self.vars):
            raise ValueError(f"duplicate variable names in {self.vars}")
        clash = set(self.vars) & set(self.field.params)
        if clash:
            raise ValueError(f"names used both as variables and parameters: {sorted(clash)}")

    @classmethod
    def create(cls, vars: Iterable[str], params: Iterable[str] = (), param_deltas=None) -> RingContext:
        return cls(tuple(vars), BaseField(tuple(params), param_deltas))

    @property
    def params(self):
        return self.field.params

    @property
    def nvars(self) -> int:
        return len(self.vars)

    def index(self, name: str) -> int:
        try:
            return self.vars.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def var(self, name: str) -> Polynomial:
        exp = [0] * self.nvars
        exp[self.index(name)] = 1
        return Polynomial(self, {tuple(exp): self.field.one}, _trusted=True)

    @property
    def gens(self):
        return tuple(self.var(v) for v in self.vars)

    def param(self, name: str) -> Polynomial:
        return self.const(self.field.param(name))

    def const(self, c) -> Polynomial:
        c = self.field(c)
        if not c:
            return Polynomial(self, {}, _trusted=True)
        return Polynomial(self, {(0,) * self.nvars: c}, _trusted=True)

    def zero(self) -> Polynomial:
        return Polynomial(self, {}, _trusted=True)

    def one(self) -> Polynomial:
        return self.const(1)

    def with_vars(self, vars: Iterable[str]) -> RingContext:
        return RingContext(tuple(vars), self.field)

    def extend(self, names: Iterable[str]) -> RingContext:
        return RingContext(self.vars + tuple(names), self.field)

    def fresh(self, base: str) -> str:
        taken = set(self.vars) | set(self.params)
        name = base
        while name in taken:
            name += "_"
        return name


class Polynomial:
    __slots__ = ("ctx", "terms", "_hash")

    def __init__(self, ctx: RingContext, terms: Mapping | None = None, *, _trusted: bool = False):
        self.ctx = ctx
        if _trusted:
            self.terms = terms
        else:
            conv = ctx.field
            n = ctx.nvars
            clean = {}
            for exp, c in (terms or {}).items():
                exp = tuple(exp)
                if len(exp) != n:
                    raise ValueError(f"exponent {exp} does not match {n} variables")
                c = conv(c)
                if c:
                    clean[exp] = clean.get(exp, 0) + c
                    if not clean[exp]:
                        del clean[exp]
            self.terms = clean
        self._hash = None

    # -- coercion -------------------------------------------------------
    def _coerce(self, other) -> Polynomial:
        if isinstance(other, Polynomial):
            if other.ctx is not self.ctx and other.ctx != self.ctx:
                raise ContextMismatch(f"contexts differ: {self.ctx.vars} vs {other.ctx.vars}")
            return other
        if isinstance(other, _SCALARS):
            return self.ctx.const(other)
        return NotImplemented

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v = v + c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return Polynomial(self.ctx, out, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.ctx, {e: -c for e, c in self.terms.items()}, _trusted=True)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, _SCALARS):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e)
                out[e] = c1 * c2 if v is None else v + c1 * c2
        return Polynomial(self.ctx, {e: c for e, c in out.items() if c}, _trusted=True)

    __rmul__ = __mul__

    def scale(self, c) -> Polynomial:
        c = self.ctx.field(c)
        if not c:
            return self.ctx.zero()
        return Polynomial(self.ctx, {e: v * c for e, v in self.terms.items()}, _trusted=True)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial exponents must be natural numbers")
        result = self.ctx.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __truediv__(self, other):
        # only division by a nonzero base-field element stays polynomial
        if isinstance(other, Polynomial):
            if not other.is_constant():
                return NotImplemented
            other = other.constant_coeff()
        c = self.ctx.field(other)
        if not c:
            raise ZeroDivisionError("division by zero")
        return self.scale(1 / c)

    # -- comparison -----------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, _SCALARS):
            other = self.ctx.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.ctx == other.ctx and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ctx.vars, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # -- inspection -----------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_coeff(self):
        return self.terms.get((0,) * self.ctx.nvars, self.ctx.field.zero)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, name: str) -> int:
        i = self.ctx.index(name)
        return max((e[i] for e in self.terms), default=-1)

    def variables(self) -> tuple:
        used = set()
        for e in self.terms:
            used.update(i for i, k in enumerate(e) if k)
        return tuple(self.ctx.vars[i] for i in sorted(used))

    def coeff(self, exp):
        return self.terms.get(tuple(exp), self.ctx.field.zero)

    def leading_term(self, key=grevlex_key):
        e = max(self.terms, key=key)
        return e, self.terms[e]

    def monic(self, key=grevlex_key) -> Polynomial:
        if not self.terms:
            return self
        _, c = self.leading_term(key)
        return self.scale(1 / c)

    # -- structural maps ------------------------------------------------
    def to_context(self, ctx: RingContext, rename: Mapping[str, str] | None = None) -> Polynomial:
        """Re-index into ``ctx``, matching variables by (possibly renamed) name."""
        if ctx.field != self.ctx.field:
            raise ContextMismatch("base fields differ")
        rename = rename or {}
        used = self.variables()
        pos = {self.ctx.index(v): ctx.index(rename.get(v, v)) for v in used}
        n = ctx.nvars
        out = {}
        for e, c in self.terms.items():
            ne = [0] * n
            for i, k in enumerate(e):
                if k:
                    ne[pos[i]] = k
            out[tuple(ne)] = c
        return Polynomial(ctx, out, _trusted=True)

    def diff(self, name: str) -> Polynomial:
        return partial_derivative(self, name)

    def __call__(self, *args, **kwargs):
        return evaluate(self, dict(zip(self.ctx.vars, args), **kwargs))

    # -- printing -------------------------------------------------------
    def __str__(self):
        return format_polynomial(self)

    def __repr__(self):
        return f"Polynomial({format_polynomial(self)!r})"


def format_polynomial(f: Polynomial) -> str:
    if not f.terms:
        return "0"
    field = f.ctx.field
    pieces = []
    for exp in sorted(f.terms, key=grevlex_key, reverse=True):
        c = f.terms[exp]
        mono = format_monomial(exp, f.ctx.vars)
        sign, body = _format_coeff(field, c, mono)
        pieces.append((sign, body))
    out = ("-" if pieces[0][0] < 0 else "") + pieces[0][1]
    for sign, body in pieces[1:]:
        out += (" - " if sign < 0 else " + ") + body
    return out


def _format_coeff(field: BaseField, c, mono: str):
    """Return (sign, text) for the term c*mono, sign in {+1, -1}."""
    if field.params and not field.is_rational(c):
        num, den = field.numer_denom(c)
        if den == 1 and len(num.terms()) == 1:
            (pexp, r), = num.terms()
            pm = format_monomial(pexp, field.params)
            r = _mpq(r)
            body = pm if abs(r) == 1 else f"{abs(r)}*{pm}"
            return (-1 if r < 0 else 1), (f"{body}*{mono}" if mono else body)
        sign = 1
        if _mpq(num.LC) < 0:
            sign, c = -1, -c
        body = f"({field.format(c)})"
        return sign, (f"{body}*{mono}" if mono else body)
    r = field.to_rational(c)
    mag = abs(r)
    if not mono:
        body = str(mag)
    elif mag == 1:
        body = mono
    else:
        body = f"{mag}*{mono}"
    return (-1 if r < 0 else 1), body


# ---------------------------------------------------------------------------
# rational functions


@lru_cache(maxsize=None)
def _ring_for(ctx: RingContext):
    names = ctx.field.params + ctx.vars
    if not names:
        names = ("_",)
    R, *_ = _sympy_ring(",".join(names), QQ)
    return R


def _to_sympy(f: Polynomial):
    """f = P / L with P in Q[params, vars] and L in Q[params]; returns (P, L)."""
    R = _ring_for(f.ctx)
    field = f.ctx.field
    m = len(field.params)
    if not m:
        return R({e: c for e, c in f.terms.items()} if f.ctx.vars else {(0,): f.constant_coeff()}), 1
    L = field._frac.ring.one
    for c in f.terms.values():
        L = L.lcm(c.denom)
    out = {}
    for e, c in f.terms.items():
        num = c.numer * L.exquo(c.denom)
        for pe, r in num.terms():
            out[pe + e] = r
    return R(out), L


def _from_sympy(P, ctx: RingContext) -> Polynomial:
    field = ctx.field
    m = len(field.params)
    n = ctx.nvars
    if not m:
        if not n:
            return ctx.const(P.coeff(1) if P else 0)
        return Polynomial(ctx, {tuple(e): _mpq(c) for e, c in P.terms()}, _trusted=True)
    groups: dict = {}
    for e, c in P.terms():
        groups.setdefault(tuple(e[m:]), {})[tuple(e[:m])] = c
    ring = field._frac.ring
    out = {}
    for xe, pterms in groups.items():
        out[xe[:n] if n else ()] = field._frac(ring(pterms))
    return Polynomial(ctx, out, _trusted=True)


def _cancel(num: Polynomial, den: Polynomial):
    if not den:
        raise ZeroDivisionError("rational function with zero denominator")
    ctx = num.ctx
    if not num:
        return ctx.zero(), ctx.one()
    if den.is_constant():
        return num / den.constant_coeff(), ctx.one()
    Pn, Ln = _to_sympy(num)
    Pd, Ld = _to_sympy(den)
    _, Pn, Pd = Pn.cofactors(Pd)
    n = _from_sympy(Pn, ctx)
    d = _from_sympy(Pd, ctx)
    if ctx.field.params:
        n = n.scale(ctx.field._frac(Ld))
        d = d.scale(ctx.field._frac(Ln))
    _, lc = d.leading_term()
    return n.scale(1 / lc), d.scale(1 / lc)


class RationalFunction:
    """num/den with gcd(num, den) = 1 and den monic under grevlex."""

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial | None = None, *, _normalized=False):
        if den is None:
            den = num.ctx.one()
        if not isinstance(den, Polynomial):
            den = num.ctx.const(den)
        if den.ctx != num.ctx:
            raise ContextMismatch("numerator and denominator live in different contexts")
        if not _normalized:
            num, den = _cancel(num, den)
        self.num = num
        self.den = den

    @property
    def ctx(self):
        return self.num.ctx

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            if other.ctx != self.ctx:
                raise ContextMismatch("contexts differ")
            return other
        if isinstance(other, Polynomial):
            return RationalFunction(self.num._coerce(other), _normalized=True)
        if isinstance(other, _SCALARS):
            return RationalFunction(self.ctx.const(other), _normalized=True)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, _normalized=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.num:
            raise ZeroDivisionError("division by zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, n: int):
        if n < 0:
            return RationalFunction(self.den ** (-n), self.num ** (-n))
        return RationalFunction(self.num ** n, self.den ** n, _normalized=True)

    def __eq__(self, other):
        if isinstance(other, (Polynomial,) + _SCALARS):
            other = self._coerce(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __bool__(self):
        return bool(self.num)

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_polynomial(self) -> Polynomial:
        if not self.is_polynomial():
            raise ValueError(f"{self} is not a polynomial")
        return self.num / self.den.constant_coeff()

    def __str__(self):
        if self.den == 1:
            return str(self.num)
        num = str(self.num)
        if len(self.num.terms) > 1:
            num = f"({num})"
        den = str(self.den)
        if not set(den) <= set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_^"):
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self):
        return f"RationalFunction({str(self)!r})"


# ---------------------------------------------------------------------------
# derivations


class DerivationSpec:
    """delta on ctx: delta(x_i) = var_deltas[x_i]; delta on params from ctx.field."""

    __slots__ = ("ctx", "var_deltas")

    def __init__(self, ctx: RingContext, var_deltas):
        if isinstance(var_deltas, Mapping):
            missing = set(ctx.vars) - set(var_deltas)
            extra = set(var_deltas) - set(ctx.vars)
            if missing or extra:
                raise ValueError(f"derivation must give exactly one value per variable "
                                 f"(missing {sorted(missing)}, unknown {sorted(extra)})")
            values = [var_deltas[v] for v in ctx.vars]
        else:
            values = list(var_deltas)
            if len(values) != ctx.nvars:
                raise ValueError(f"expected {ctx.nvars} components, got {len(values)}")
        comps = []
        for g in values:
            if not isinstance(g, Polynomial):
                g = ctx.const(g)
            elif g.ctx != ctx:
                raise ContextMismatch("derivation component outside the context")
            comps.append(g)
        self.ctx = ctx
        self.var_deltas = tuple(comps)

    def __getitem__(self, name: str) -> Polynomial:
        return self.var_deltas[self.ctx.index(name)]

    def __eq__(self, other):
        return isinstance(other, DerivationSpec) and self.ctx == other.ctx and self.var_deltas == other.var_deltas

    def __hash__(self):
        return hash((self.ctx, self.var_deltas))

    def __repr__(self):
        body = ", ".join(f"d({v}) = {g}" for v, g in zip(self.ctx.vars, self.var_deltas))
        return f"DerivationSpec({body})"


def poly_arith(a: Polynomial, b: Polynomial, op: str) -> Polynomial:
    if a.ctx != b.ctx:
        raise ContextMismatch("contexts differ")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def partial_derivative(f: Polynomial, name: str) -> Polynomial:
    i = f.ctx.index(name)
    out = {}
    for e, c in f.terms.items():
        k = e[i]
        if k:
            ne = e[:i] + (k - 1,) + e[i + 1:]
            out[ne] = c * k
    return Polynomial(f.ctx, out, _trusted=True)


def coeff_delta(f: Polynomial, ctx: RingContext | None = None) -> Polynomial:
    """f^delta: apply delta to every coefficient."""
    if ctx is not None and ctx != f.ctx:
        raise ContextMismatch("polynomial is not over the given context")
    field = f.ctx.field
    if not field.params:
        return f.ctx.zero()
    out = {}
    for e, c in f.terms.items():
        d = field.delta(c)
        if d:
            out[e] = d
    return Polynomial(f.ctx, out, _trusted=True)


def derivation_apply(f: Polynomial, d: DerivationSpec) -> Polynomial:
    """delta_s f = f^delta + sum_i (df/dx_i) * g_i, unreduced."""
    if f.ctx != d.ctx:
        raise ContextMismatch("polynomial and derivation live in different contexts")
    out = coeff_delta(f)
    for v, g in zip(f.ctx.vars, d.var_deltas):
        if g:
            df = partial_derivative(f, v)
            if df:
                out = out + df * g
    return out


def rf_delta(phi: RationalFunction, d: DerivationSpec) -> RationalFunction:
    p, q = phi.num, phi.den
    return RationalFunction(derivation_apply(p, d) * q - p * derivation_apply(q, d), q * q)


def evaluate(f: Polynomial, point: Mapping[str, object]):
    field = f.ctx.field
    missing = [v for v in f.ctx.vars if v not in point]
    if missing:
        raise ValueError(f"point does not assign {missing}")
    vals = [field(point[v]) for v in f.ctx.vars]
    total = field.zero
    for e, c in f.terms.items():
        t = c
        for v, k in zip(vals, e):
            if k:
                t = t * v ** k
        total = total + t
    return total


def compose(f: Polynomial, images: Sequence, ctx: RingContext | None = None):
    """Substitute images[i] for the i-th variable of f.

    Images may be Polynomials (result is a Polynomial in their context) or
    RationalFunctions (result is a RationalFunction, normalized once).
    """
    if len(images) != f.ctx.nvars:
        raise ValueError("one image per variable is required")
    if ctx is None:
        if not images:
            raise ValueError("target context required for a map from zero variables")
        ctx = images[0].ctx
    if ctx.field != f.ctx.field:
        raise ContextMismatch("base fields differ")
    if any(isinstance(g, RationalFunction) for g in images):
        rfs = [g if isinstance(g, RationalFunction) else RationalFunction(g, _normalized=True) for g in images]
        top = [max((e[i] for e in f.terms), default=0) for i in range(f.ctx.nvars)]
        num = ctx.zero()
        for e, c in f.terms.items():
            t = ctx.const(c)
            for i, k in enumerate(e):
                if k:
                    t = t * rfs[i].num ** k
                if top[i] - k:
                    t = t * rfs[i].den ** (top[i] - k)
            num = num + t
        den = ctx.one()
        for i, k in enumerate(top):
            if k:
                den = den * rfs[i].den ** k
        return RationalFunction(num, den)
    powers: dict = {}
    out = ctx.zero()
    for e, c in f.terms.items():
        t = ctx.const(c)
        for i, k in enumerate(e):
            if k:
                key = (i, k)
                if key not in powers:
                    powers[key] = images[i] ** k
                t = t * powers[key]
        out = out + t
    return out
