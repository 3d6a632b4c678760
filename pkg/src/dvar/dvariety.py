"""Affine D-varieties: a variety V with a section s: V -> tau(V).

All geometric checks use radical membership, so user generator lists need
not be radical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .groebner import GroebnerBasis, groebner, krull_dimension, normal_form, radical_equal, radical_member
from .poly import (
    ContextMismatch,
    DerivationSpec,
    Polynomial,
    RingContext,
    coeff_delta,
    derivation_apply,
    evaluate,
    partial_derivative,
)

__all__ = [
    "Variety",
    "Section",
    "DVariety",
    "DoubledVariety",
    "SectionCheck",
    "SubvarietyCheck",
    "ComponentsReport",
    "EmptyVariety",
    "NotASubvariety",
    "NotOnVariety",
    "InvalidSection",
    "DecompositionMismatch",
    "tangent_bundle",
    "prolongation",
    "validate_section",
    "make_dvariety",
    "induced_derivation",
    "is_d_subvariety",
    "is_d_point",
    "product",
    "components_delta_check",
    "generic_type_dimension",
    "affine_space",
]


class EmptyVariety(ValueError):
    pass


class NotASubvariety(ValueError):
    pass


class NotOnVariety(ValueError):
    pass


class InvalidSection(ValueError):
    def __init__(self, check: SectionCheck):
        self.check = check
        gen, res = check.failures[0]
        super().__init__(f"section does not map into the prolongation: generator {gen} leaves residue {res}")


class DecompositionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Variety:
    ctx: RingContext
    gens: tuple = ()
    claims: frozenset = frozenset()

    def __post_init__(self):
        gens = tuple(g for g in self.gens)
        for g in gens:
            if g.ctx != self.ctx:
                raise ContextMismatch("generator outside the variety's context")
        object.__setattr__(self, "gens", gens)
        object.__setattr__(self, "claims", frozenset(self.claims))
        bad = self.claims - {"radical", "prime"}
        if bad:
            raise ValueError(f"unknown claim flags {sorted(bad)}")
        if groebner(list(gens), ctx=self.ctx).is_unit():
            raise EmptyVariety("1 lies in the ideal: the variety is empty")

    @property
    def basis(self) -> GroebnerBasis:
        return groebner(list(self.gens), ctx=self.ctx)

    def contains(self, f: Polynomial) -> bool:
        """f vanishes on V."""
        return radical_member(f, self.gens)


def affine_space(ctx: RingContext) -> Variety:
    return Variety(ctx, ())


@dataclass(frozen=True)
class Section:
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))


@dataclass(frozen=True)
class DVariety:
    variety: Variety
    section: Section
    validated: bool = field(default=False, compare=False)

    @property
    def ctx(self) -> RingContext:
        return self.variety.ctx

    @property
    def spec(self) -> DerivationSpec:
        return DerivationSpec(self.ctx, self.section.components)

    @property
    def gens(self):
        return self.variety.gens

    def _require_valid(self):
        if not self.validated:
            raise ValueError("D-variety has not passed validate_section")


@dataclass(frozen=True)
class DoubledVariety:
    """TV or tau V inside A^{2n}: base variables followed by their duals."""

    ctx: RingContext
    gens: tuple
    base_vars: tuple
    dual_vars: tuple


def _dual_names(ctx: RingContext):
    names = []
    taken = set(ctx.vars) | set(ctx.params)
    for v in ctx.vars:
        name = "d" + v
        while name in taken:
            name += "_"
        taken.add(name)
        names.append(name)
    return names


def _doubled(V: Variety, twisted: bool) -> DoubledVariety:
    ctx = V.ctx
    duals = _dual_names(ctx)
    big = ctx.extend(duals)
    ys = [big.var(d) for d in duals]
    gens = []
    for f in V.gens:
        gens.append(f.to_context(big))
    for f in V.gens:
        lin = coeff_delta(f).to_context(big) if twisted else big.zero()
        for v, y in zip(ctx.vars, ys):
            df = partial_derivative(f, v)
            if df:
                lin = lin + df.to_context(big) * y
        gens.append(lin)
    return DoubledVariety(big, tuple(gens), ctx.vars, tuple(duals))


def tangent_bundle(V: Variety) -> DoubledVariety:
    return _doubled(V, twisted=False)


def prolongation(V: Variety) -> DoubledVariety:
    return _doubled(V, twisted=True)


@dataclass(frozen=True)
class SectionCheck:
    valid: bool
    dvariety: DVariety | None
    failures: tuple = ()      # (generator, normal form of its residue)
    residues: tuple = ()      # normal form per generator, in order


def validate_section(V: Variety, s: Section | Sequence[Polynomial]) -> SectionCheck:
    comps = s.components if isinstance(s, Section) else tuple(s)
    s = Section(tuple(g if isinstance(g, Polynomial) else V.ctx.const(g) for g in comps))
    if len(s.components) != V.ctx.nvars:
        raise ValueError(f"section has {len(s.components)} components for {V.ctx.nvars} variables")
    if groebner(list(V.gens), ctx=V.ctx).is_unit():
        raise EmptyVariety("1 lies in the ideal: the variety is empty")
    spec = DerivationSpec(V.ctx, s.components)
    gb = V.basis
    failures = []
    residues = []
    for f in V.gens:
        r = derivation_apply(f, spec)
        nf = gb.reduce(r)
        residues.append(nf)
        if nf and not radical_member(r, V.gens):
            failures.append((f, nf))
    ok = not failures
    D = DVariety(V, s, validated=True) if ok else None
    return SectionCheck(ok, D, tuple(failures), tuple(residues))


def make_dvariety(V: Variety, s) -> DVariety:
    check = validate_section(V, s)
    if not check.valid:
        raise InvalidSection(check)
    return check.dvariety


def induced_derivation(D: DVariety, f: Polynomial) -> Polynomial:
    """Canonical representative of delta_s(f + I(V)) in k[V]."""
    D._require_valid()
    return D.variety.basis.reduce(derivation_apply(f, D.spec))


@dataclass(frozen=True)
class SubvarietyCheck:
    is_d_subvariety: bool
    generators: tuple   # (h, delta_s h reduced mod W + V, ok)

    def __bool__(self):
        return self.is_d_subvariety


def is_d_subvariety(D: DVariety, W_gens: Sequence[Polynomial]) -> SubvarietyCheck:
    D._require_valid()
    W_gens = list(W_gens)
    for g in D.gens:
        if not radical_member(g, W_gens) if W_gens else g:
            raise NotASubvariety(f"W is not contained in V: {g} does not vanish on W")
    ambient = W_gens + list(D.gens)
    if groebner(ambient, ctx=D.ctx).is_unit():
        raise NotASubvariety("W is empty")
    gb = groebner(ambient, ctx=D.ctx)
    spec = D.spec
    rows = []
    for h in W_gens:
        dh = derivation_apply(h, spec)
        ok = radical_member(dh, ambient)
        rows.append((h, gb.reduce(dh), ok))
    return SubvarietyCheck(all(ok for _, _, ok in rows), tuple(rows))


def is_d_point(D: DVariety, point: Mapping[str, object]):
    """Whether s(a) = nabla(a); returns (verdict, [(var, s_i(a) - delta(a_i))])."""
    D._require_valid()
    field = D.ctx.field
    for g in D.gens:
        if evaluate(g, point):
            raise NotOnVariety(f"generator {g} does not vanish at the point")
    diffs = []
    for v, g in zip(D.ctx.vars, D.section.components):
        a = field(point[v])
        diffs.append((v, evaluate(g, point) - field.delta(a)))
    return all(not d for _, d in diffs), diffs


def product(D1: DVariety, D2: DVariety, suffix: str = "_2") -> DVariety:
    """(V x W, s x t); second factor's variables are suffixed when names clash."""
    D1._require_valid()
    D2._require_valid()
    c1, c2 = D1.ctx, D2.ctx
    if c1.field != c2.field:
        raise ContextMismatch("factors are over different base fields")
    rename = {}
    if set(c1.vars) & set(c2.vars):
        taken = set(c1.vars) | set(c2.vars) | set(c1.params)
        for v in c2.vars:
            name = v + suffix
            while name in taken:
                name += "_"
            taken.add(name)
            rename[v] = name
    big = c1.extend(rename.get(v, v) for v in c2.vars)
    gens = [g.to_context(big) for g in D1.gens] + [g.to_context(big, rename) for g in D2.gens]
    comps = ([g.to_context(big) for g in D1.section.components]
             + [g.to_context(big, rename) for g in D2.section.components])
    claims = D1.variety.claims & D2.variety.claims & {"radical"}
    return make_dvariety(Variety(big, tuple(gens), claims), Section(tuple(comps)))


@dataclass(frozen=True)
class ComponentsReport:
    ambient_ok: bool
    ambient: SubvarietyCheck
    verdicts: tuple   # SubvarietyCheck per component

    @property
    def all_ok(self) -> bool:
        return self.ambient_ok and all(self.verdicts)


def components_delta_check(D: DVariety, components: Sequence[Sequence[Polynomial]],
                           ideal: Sequence[Polynomial] | None = None) -> ComponentsReport:
    """Check that each supplied component of V(ideal) is a D-subvariety.

    ``ideal`` defaults to I(V).  The union of the components must equal
    V(ideal); primality of each component is the caller's claim.
    """
    D._require_valid()
    ideal = list(D.gens) if ideal is None else list(ideal)
    ambient = is_d_subvariety(D, ideal)
    comps = [list(c) for c in components]
    for c in comps:
        for g in ideal:
            if not radical_member(g, c):
                raise DecompositionMismatch(f"component {[str(h) for h in c]} is not contained in V(ideal)")
    products = [D.ctx.one()]
    for c in comps:
        products = [p * h for p in products for h in c] if c else products
    if any(not c for c in comps):
        products = [D.ctx.zero()]
    if not radical_equal(ideal, products, ctx=D.ctx):
        raise DecompositionMismatch("the components do not cover V(ideal)")
    verdicts = tuple(is_d_subvariety(D, c) for c in comps)
    return ComponentsReport(ambient.is_d_subvariety, ambient, verdicts)


def generic_type_dimension(D: DVariety) -> int:
    D._require_valid()
    return krull_dimension(list(D.gens), ctx=D.ctx)
