"""Compile a scalar ODE into a D-variety, and extract its (order, polynomial) signature.

Jet variables are named ``u0, u1, ...``: ``u_i`` stands for the i-th derivative
of the unknown.  The compiled variety gets one extra variable ``w`` that
inverts the resolvent (the denominator, or dP/du_L for implicit equations),
which makes the section polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from gmpy2 import mpq

from .dvariety import DVariety, Section, Variety, validate_section
from .field import BaseField, QQ_FIELD
from .poly import (
    DerivationSpec,
    Polynomial,
    RationalFunction,
    RingContext,
    coeff_delta,
    derivation_apply,
    grevlex_key,
    partial_derivative,
)

__all__ = [
    "OdeSpec",
    "CompiledDVariety",
    "TypeSignature",
    "CompileError",
    "jet_context",
    "next_derivative",
    "compile_ode",
    "type_signature",
]


class CompileError(ValueError):
    pass


def jet_context(order: int, field: BaseField = QQ_FIELD) -> RingContext:
    """u0..u_order over ``field``."""
    return RingContext(tuple(f"u{i}" for i in range(order + 1)), field)


@dataclass(frozen=True)
class OdeSpec:
    """delta^L x = num/den (explicit) or P(u0..uL) = 0 (implicit), in jet_context(L)."""

    order: int
    num: Polynomial | None = None
    den: Polynomial | None = None
    P: Polynomial | None = None

    def __post_init__(self):
        L = self.order
        if L < 1:
            raise ValueError("order must be at least 1")
        top = f"u{L}"
        if self.P is not None:
            if self.num is not None or self.den is not None:
                raise ValueError("give either an explicit right-hand side or an implicit P, not both")
            if tuple(self.P.ctx.vars) != tuple(f"u{i}" for i in range(L + 1)):
                raise ValueError(f"implicit equation must live in u0..u{L}")
            if not partial_derivative(self.P, top):
                raise ValueError(f"P does not involve the top jet variable {top}")
        else:
            if self.num is None:
                raise ValueError("explicit form needs a numerator")
            den = self.den if self.den is not None else self.num.ctx.one()
            object.__setattr__(self, "den", den)
            for f in (self.num, den):
                if tuple(f.ctx.vars) != tuple(f"u{i}" for i in range(L + 1)):
                    raise ValueError(f"explicit right-hand side must live in u0..u{L}")
                if f.degree_in(top) > 0:
                    raise ValueError(f"explicit right-hand side may not involve {top}")
            if not den:
                raise ValueError("denominator is zero")

    @classmethod
    def explicit(cls, order: int, rhs: RationalFunction | Polynomial) -> OdeSpec:
        if isinstance(rhs, Polynomial):
            rhs = RationalFunction(rhs, _normalized=True)
        return cls(order, num=rhs.num, den=rhs.den)

    @classmethod
    def implicit(cls, order: int, P: Polynomial) -> OdeSpec:
        return cls(order, P=P)

    @property
    def is_implicit(self) -> bool:
        return self.P is not None

    @property
    def ctx(self) -> RingContext:
        return self.P.ctx if self.is_implicit else self.num.ctx


@dataclass(frozen=True)
class CompiledDVariety:
    dvariety: DVariety
    jet_map: tuple       # jet index -> variable name
    localizer: str


@dataclass(frozen=True)
class TypeSignature:
    ell: int
    g: Polynomial


def _jet_shift(P: Polynomial, L: int) -> Polynomial:
    """P^delta + sum_{i<L} dP/du_i * u_{i+1}."""
    ctx = P.ctx
    out = coeff_delta(P)
    for i in range(L):
        d = partial_derivative(P, f"u{i}")
        if d:
            out = out + d * ctx.var(f"u{i + 1}")
    return out


def next_derivative(P: Polynomial, order: int | None = None) -> RationalFunction:
    """The value of delta^{L+1} x forced by differentiating P(u0..uL) = 0."""
    L = order if order is not None else P.ctx.nvars - 1
    resolvent = partial_derivative(P, f"u{L}")
    if not resolvent:
        raise CompileError("resolvent dP/du_L is identically zero")
    return RationalFunction(-_jet_shift(P, L), resolvent)


def compile_ode(spec: OdeSpec) -> CompiledDVariety:
    L = spec.order
    jet = spec.ctx
    w = jet.fresh("w")
    if spec.is_implicit:
        names = [f"u{i}" for i in range(L + 1)]
        ctx = RingContext(tuple(names) + (w,), jet.field)
        P = spec.P.to_context(ctx)
        R = partial_derivative(P, f"u{L}")
        if not R:
            raise CompileError("degenerate resolvent")
        W = ctx.var(w)
        comps = [ctx.var(f"u{i + 1}") for i in range(L)]
        comps.append(-_jet_shift(P, L) * W)
        gens = (P, W * R - 1)
    else:
        names = [f"u{i}" for i in range(L)]
        ctx = RingContext(tuple(names) + (w,), jet.field)
        num = spec.num.to_context(ctx)
        R = spec.den.to_context(ctx)
        W = ctx.var(w)
        comps = [ctx.var(f"u{i + 1}") for i in range(L - 1)]
        comps.append(num * W)
        gens = (W * R - 1,)
    # delta(w) is forced by w*R = 1: delta(w) = -w^2 * delta_s(R)
    partial = DerivationSpec(ctx, comps + [ctx.zero()])
    comps.append(-(W * W) * derivation_apply(R, partial))
    check = validate_section(Variety(ctx, gens, {"prime"}), Section(tuple(comps)))
    if not check.valid:
        raise CompileError(f"compiled section failed validation: {check.failures}")
    return CompiledDVariety(check.dvariety, tuple(names), w)


def _normalize(g: Polynomial) -> Polynomial:
    """Clear denominators, divide out the content, make the leading coefficient positive."""
    field = g.ctx.field
    if not g:
        return g
    if field.params:
        ring = field._frac.ring
        L = ring.one
        for c in g.terms.values():
            L = L.lcm(c.denom)
        polys = {e: c.numer * L.exquo(c.denom) for e, c in g.terms.items()}
        content = ring.zero
        for p in polys.values():
            content = content.gcd(p)
        polys = {e: p.exquo(content) for e, p in polys.items()}
        dens = 1
        nums = 0
        for p in polys.values():
            for _, r in p.terms():
                r = mpq(r)
                dens = dens * r.denominator // gcd(dens, r.denominator)
        for p in polys.values():
            for _, r in p.terms():
                nums = gcd(nums, int(mpq(r) * dens))
        scale = mpq(dens, nums)
        polys = {e: p * scale for e, p in polys.items()}
        lead = max(polys, key=grevlex_key)
        if polys[lead].LC < 0:
            polys = {e: -p for e, p in polys.items()}
        return Polynomial(g.ctx, {e: field._frac(p) for e, p in polys.items()}, _trusted=True)
    dens = 1
    for c in g.terms.values():
        dens = dens * c.denominator // gcd(dens, c.denominator)
    ints = {e: int(c * dens) for e, c in g.terms.items()}
    content = 0
    for v in ints.values():
        content = gcd(content, v)
    lead = max(ints, key=grevlex_key)
    if ints[lead] < 0:
        content = -content
    return Polynomial(g.ctx, {e: mpq(v, content) for e, v in ints.items()}, _trusted=True)


def type_signature(spec: OdeSpec) -> TypeSignature:
    if spec.is_implicit:
        g = spec.P
    else:
        ctx = spec.ctx
        g = spec.den * ctx.var(f"u{spec.order}") - spec.num
    return TypeSignature(spec.order, _normalize(g))
