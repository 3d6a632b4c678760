"""D-rational maps, first integrals, Darboux polynomials, dominance.

The searches here produce witnesses or report nothing up to the given
bounds; they never certify that no witness exists.

Unknown coefficients range over Q-linear combinations of monomials in the
variables *and* the base-field parameters (total degree within the bound).
delta is only Q-linear once parameters have nonzero derivative, so the
linear systems are set up over Q after clearing parameter denominators.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations, product as iproduct
from math import gcd
from typing import Sequence

from gmpy2 import mpq
from sympy import Poly, QQ, Symbol

from .dvariety import DVariety, Variety, affine_space, make_dvariety
from .groebner import LEX, MonomialOrder, eliminate, groebner, krull_dimension, radical_member
from .linalg import nullspace, rref
from .poly import (
    ContextMismatch,
    Polynomial,
    RationalFunction,
    RingContext,
    compose,
    derivation_apply,
    grevlex_key,
    rf_delta,
)

log = logging.getLogger(__name__)

__all__ = [
    "RationalMap",
    "DarbouxPolynomial",
    "FirstIntegralBasis",
    "DMapCheck",
    "ImageReport",
    "NotIntoTarget",
    "NotIrreducible",
    "is_d_rational_map",
    "compose_maps",
    "first_integral_map",
    "polynomial_first_integrals",
    "darboux_polynomials",
    "rational_first_integrals",
    "image_closure",
    "is_dominant",
    "is_generically_finite",
    "is_constant_on",
]


class NotIntoTarget(ValueError):
    pass


class NotIrreducible(ValueError):
    pass


def _variety(X) -> Variety:
    return X.variety if isinstance(X, DVariety) else X


@dataclass(frozen=True)
class RationalMap:
    source: DVariety | Variety
    target: DVariety | Variety
    components: tuple

    def __post_init__(self):
        src, tgt = _variety(self.source), _variety(self.target)
        comps = []
        for c in self.components:
            if isinstance(c, Polynomial):
                c = RationalFunction(c, _normalized=True)
            if c.ctx != src.ctx:
                raise ContextMismatch("map components must live in the source context")
            comps.append(c)
        if len(comps) != tgt.ctx.nvars:
            raise ValueError(f"{len(comps)} components for a target with {tgt.ctx.nvars} variables")
        if src.ctx.field != tgt.ctx.field:
            raise ContextMismatch("source and target are over different base fields")
        for c in comps:
            if radical_member(c.den, src.gens):
                raise ValueError(f"component {c} is undefined on all of the source")
        object.__setattr__(self, "components", tuple(comps))


@dataclass(frozen=True)
class DMapCheck:
    d_rational: bool
    coordinates: tuple   # (target variable, residue numerator mod I(source), ok)

    def __bool__(self):
        return self.d_rational


def _pullback(g: Polynomial, f: RationalMap) -> RationalFunction:
    src = _variety(f.source)
    if not f.components:
        return RationalFunction(src.ctx.const(g.constant_coeff()), _normalized=True)
    return compose(g, list(f.components), src.ctx)


def is_d_rational_map(f: RationalMap) -> DMapCheck:
    """delta_{s1}(f_j) == t_j(f) in k(V1) for every target coordinate."""
    src, tgt = f.source, f.target
    for D in (src, tgt):
        if not isinstance(D, DVariety) or not D.validated:
            raise ValueError("source and target must be validated D-varieties")
    gb = src.variety.basis
    for G in tgt.gens:
        if not radical_member(_pullback(G, f).num, src.gens):
            raise NotIntoTarget(f"does not map into target: {G} does not vanish on the image")
    spec = src.spec
    rows = []
    for v, fj, tj in zip(tgt.ctx.vars, f.components, tgt.section.components):
        diff = rf_delta(fj, spec) - _pullback(tj, f)
        ok = radical_member(diff.num, src.gens)
        rows.append((v, gb.reduce(diff.num), ok))
    return DMapCheck(all(ok for *_, ok in rows), tuple(rows))


def compose_maps(g: RationalMap, f: RationalMap) -> RationalMap:
    """g o f."""
    comps = []
    for c in g.components:
        comps.append(_pullback(c.num, f) / _pullback(c.den, f))
    return RationalMap(f.source, g.target, tuple(comps))


def first_integral_map(D: DVariety, phi) -> RationalMap:
    """phi as a map (V, s) -> (A^1, 0)."""
    line = RingContext((D.ctx.fresh("t"),), D.ctx.field)
    return RationalMap(D, make_dvariety(affine_space(line), [0]), (phi,))


def is_constant_on(V: Variety, phi) -> bool:
    """phi agrees on V with an element of the base field."""
    if isinstance(phi, Polynomial):
        phi = RationalFunction(phi, _normalized=True)
    gb = V.basis
    n, d = gb.reduce(phi.num), gb.reduce(phi.den)
    if not n or radical_member(phi.num, V.gens):
        return True
    if not d:
        return False
    nlm, nc = n.leading_term()
    dlm, dc = d.leading_term()
    if nlm != dlm:
        return False
    return radical_member(phi.num - phi.den.scale(nc / dc), V.gens)


# ---------------------------------------------------------------------------
# ansatz machinery


def _monomials(n: int, bound: int):
    out = []

    def rec(prefix, left, k):
        if k == n:
            out.append(tuple(prefix))
            return
        for e in range(left + 1):
            rec(prefix + [e], left - e, k + 1)

    rec([], bound, 0)
    return out


class _Ansatz:
    """Q-basis c^a * x^m of standard monomials m with |a| + |m| <= bound.

    Columns whose x-part is nonconstant come first; pure base-field columns last.
    """

    def __init__(self, D: DVariety, bound: int, gb=None):
        ctx = D.ctx
        field = ctx.field
        gb = gb if gb is not None else D.variety.basis
        lms = gb.leading_monomials
        xmons = [e for e in _monomials(ctx.nvars, bound)
                 if not any(all(a <= b for a, b in zip(lm, e)) for lm in lms)]
        pmons = _monomials(len(field.params), bound)
        cols = [(xe, pe) for xe in xmons for pe in pmons if sum(xe) + sum(pe) <= bound]
        desc = lambda c: (grevlex_key(c[0]), grevlex_key(c[1]))
        nonconst = sorted((c for c in cols if any(c[0])), key=desc, reverse=True)
        const = sorted((c for c in cols if not any(c[0])), key=desc, reverse=True)
        self.ctx = ctx
        self.cols = nonconst + const
        self.n_nonconst = len(nonconst)
        self.elements = [Polynomial(ctx, {xe: _param_monomial(field, pe)}, _trusted=True) for xe, pe in self.cols]

    def combine(self, vec) -> Polynomial:
        out = self.ctx.zero()
        for v, e in zip(vec, self.elements):
            if v:
                out = out + e.scale(v)
        return out


def _param_monomial(field, pe):
    c = field.one
    for g, k in zip(field.gens, pe):
        if k:
            c = c * g ** k
    return c


def _coords(polys: Sequence[Polynomial]):
    """Sparse Q-coordinate dicts of polys after clearing one common parameter denominator."""
    if not polys:
        return []
    field = polys[0].ctx.field
    if not field.params:
        return [{(e, ()): mpq(c) for e, c in p.terms.items()} for p in polys]
    L = field._frac.ring.one
    for p in polys:
        for c in p.terms.values():
            L = L.lcm(c.denom)
    out = []
    for p in polys:
        row = {}
        for e, c in p.terms.items():
            for pe, r in (c.numer * L.exquo(c.denom)).terms():
                row[(e, tuple(pe))] = mpq(r)
        out.append(row)
    return out


def _matrix(columns):
    """Dense rows (over Q) from a list of sparse column dicts."""
    keys = sorted({k for col in columns for k in col})
    return [[col.get(k, mpq(0)) for col in columns] for k in keys]


# ---------------------------------------------------------------------------
# polynomial first integrals


@dataclass(frozen=True)
class FirstIntegralBasis:
    degree_bound: int
    basis: tuple


def _k_independent(polys: Sequence[Polynomial], ctx: RingContext):
    """Greedy subset of polys that is linearly independent over k modulo constants."""
    keep = []
    rows = []
    mons = sorted({e for p in polys for e in p.terms if any(e)}, key=grevlex_key, reverse=True)
    for p in polys:
        row = [p.coeff(e) for e in mons]
        if len(rref(rows + [row], len(mons))[1]) > len(rows):
            rows.append(row)
            keep.append(p)
    return keep


def _sort_key(p: Polynomial):
    return (p.degree(), grevlex_key(p.leading_term()[0]), str(p))


def polynomial_first_integrals(D: DVariety, degree_bound: int) -> FirstIntegralBasis:
    D._require_valid()
    if degree_bound < 1:
        raise ValueError("degree_bound must be at least 1")
    gb = D.variety.basis
    spec = D.spec
    ans = _Ansatz(D, degree_bound, gb)
    images = [gb.reduce(derivation_apply(e, spec)) for e in ans.elements]
    M = _matrix(_coords(images))
    if not M:
        M = [[mpq(0)] * len(ans.cols)]
    kernel = nullspace(M, len(ans.cols), mpq(1))
    found = []
    for vec in kernel:
        pivot = next(i for i, v in enumerate(vec) if v)
        if pivot >= ans.n_nonconst:
            continue   # a constant of k
        p = ans.combine(vec)
        if gb.reduce(derivation_apply(p, spec)):
            raise AssertionError(f"first integral {p} failed its recheck")
        found.append(p)
    basis = sorted(_k_independent(found, D.ctx), key=_sort_key)
    return FirstIntegralBasis(degree_bound, tuple(basis))


# ---------------------------------------------------------------------------
# Darboux polynomials


@dataclass(frozen=True)
class DarbouxPolynomial:
    p: Polynomial
    cofactor: Polynomial


def _rational_roots(u: Polynomial):
    """Rational roots of a univariate polynomial over Q (all other variables absent)."""
    (name,) = u.variables()
    i = u.ctx.index(name)
    x = Symbol("x")
    coeffs = {}
    for e, c in u.terms.items():
        coeffs[e[i]] = mpq(c)
    P = Poly({(k,): QQ(int(c.numerator), int(c.denominator)) for k, c in coeffs.items()}, x, domain=QQ)
    return sorted({mpq(int(r.numerator), int(r.denominator)) for r in P.ground_roots()})


class PositiveDimensional(ValueError):
    pass


def _rational_points(gens: Sequence[Polynomial], ctx: RingContext):
    """All Q-rational points of a zero-dimensional system over Q (lex triangular back-substitution)."""
    if not ctx.vars:
        return [()] if not any(g for g in gens) else []
    gb = groebner(list(gens), LEX, ctx=ctx)
    if gb.is_unit():
        return []
    if krull_dimension(list(gens), ctx=ctx) != 0:
        raise PositiveDimensional("solution set is not finite")
    last = ctx.vars[-1]
    uni = next(g for g in reversed(gb.gens) if g.variables() == (last,))
    rest = ctx.with_vars(ctx.vars[:-1])
    points = []
    for r in _rational_roots(uni):
        images = [rest.var(v) for v in rest.vars] + [rest.const(r)]
        sub = [compose(g, images, rest) for g in gb.gens]
        for pt in _rational_points([g for g in sub if g], rest):
            points.append(pt + (r,))
    return points


def darboux_polynomials(D: DVariety, degree_bound: int, cofactor_bound: int):
    """All p (deg <= degree_bound) with delta_s(p) = lam * p mod I(V), deg lam <= cofactor_bound."""
    D._require_valid()
    if degree_bound < 0 or cofactor_bound < 0:
        raise ValueError("bounds must be nonnegative")
    gb = D.variety.basis
    spec = D.spec
    pa = _Ansatz(D, degree_bound, gb)
    la = _Ansatz(D, cofactor_bound, gb)
    np_, nl = len(pa.cols), len(la.cols)
    A = [gb.reduce(derivation_apply(e, spec)) for e in pa.elements]
    B = [[gb.reduce(f * e) for e in pa.elements] for f in la.elements]
    allc = _coords(A + [b for row in B for b in row])
    Ac = allc[:np_]
    Bc = [allc[np_ + i * np_: np_ + (i + 1) * np_] for i in range(nl)]
    rows = sorted({k for c in allc for k in c})

    cofactors = set()
    for pivot in range(pa.n_nonconst):
        active = list(range(pivot + 1, np_))
        names = [f"q{j}" for j in active] + [f"l{i}" for i in range(nl)]
        U = RingContext(tuple(names))
        qv = {j: U.var(f"q{j}") for j in active}
        lv = [U.var(f"l{i}") for i in range(nl)]
        eqs = []
        for r in rows:
            e = U.const(Ac[pivot].get(r, 0))
            for j in active:
                a = Ac[j].get(r)
                if a:
                    e = e + qv[j].scale(a)
            for i in range(nl):
                b = Bc[i][pivot].get(r)
                if b:
                    e = e - lv[i].scale(b)
                for j in active:
                    b = Bc[i][j].get(r)
                    if b:
                        e = e - (lv[i] * qv[j]).scale(b)
            if e:
                eqs.append(e)
        lam_ideal = eliminate(eqs, [f"q{j}" for j in active], ctx=U) if eqs else []
        L = RingContext(tuple(f"l{i}" for i in range(nl)))
        lam_gens = [g.to_context(L) for g in lam_ideal]
        if eqs and groebner(eqs, ctx=U).is_unit():
            continue
        try:
            pts = _rational_points(lam_gens, L)
        except PositiveDimensional:
            log.warning("darboux: cofactors for pivot column %d form an infinite family; skipped", pivot)
            continue
        cofactors.update(pts)

    out = []
    seen = set()
    for lam_vec in sorted(cofactors):
        lam = la.combine(lam_vec)
        M = []
        for r in rows:
            M.append([Ac[j].get(r, mpq(0)) - sum((lam_vec[i] * Bc[i][j].get(r, mpq(0)) for i in range(nl)), mpq(0))
                      for j in range(np_)])
        if not M:
            M = [[mpq(0)] * np_]
        for vec in nullspace(M, np_, mpq(1)):
            pivot = next(i for i, v in enumerate(vec) if v)
            if pivot >= pa.n_nonconst:
                continue
            p = pa.combine(vec)
            if gb.reduce(derivation_apply(p, spec) - lam * p):
                raise AssertionError(f"Darboux polynomial {p} failed its recheck")
            key = p.monic()
            if key in seen:
                continue
            seen.add(key)
            out.append(DarbouxPolynomial(p, lam))
    out.sort(key=lambda d: (_sort_key(d.p), str(d.cofactor)))
    return out


# ---------------------------------------------------------------------------
# rational first integrals


def _rf_key(phi: RationalFunction):
    _, c = phi.num.leading_term()
    return (phi.num.scale(1 / c), phi.den)


def rational_first_integrals(D: DVariety, degree_bound: int, cofactor_bound: int):
    D._require_valid()
    darb = darboux_polynomials(D, degree_bound, cofactor_bound)
    V = D.variety
    spec = D.spec
    candidates = []
    for a, b in combinations(darb, 2):
        if a.cofactor == b.cofactor:
            candidates.append(RationalFunction(a.p, b.p))
    # integer relations sum m_i * lam_i = 0 within the degree budget
    degs = [d.p.degree() for d in darb]
    n = len(darb)
    ranges = [range(-(degree_bound // k), degree_bound // k + 1) for k in degs]
    for m in iproduct(*ranges):
        if not any(m) or sum(abs(a) * k for a, k in zip(m, degs)) > degree_bound:
            continue
        if next(a for a in m if a) < 0 or gcd(*m) > 1:
            continue    # phi ~ 1/phi, and powers of a smaller integral add nothing
        total = D.ctx.zero()
        for a, d in zip(m, darb):
            if a:
                total = total + d.cofactor.scale(a)
        if total:
            continue
        num, den = D.ctx.one(), D.ctx.one()
        for a, d in zip(m, darb):
            if a > 0:
                num = num * d.p ** a
            elif a < 0:
                den = den * d.p ** (-a)
        candidates.append(RationalFunction(num, den))
    out = []
    seen = set()
    candidates.sort(key=lambda r: (max(r.num.degree(), r.den.degree()), str(r)))
    for phi in candidates:
        key = _rf_key(phi)
        if key in seen:
            continue
        deg = max(phi.num.degree(), phi.den.degree())
        if any(_rf_key(psi ** k) == key or _rf_key(psi ** -k) == key
               for psi in out for k in range(2, deg + 1)):
            continue
        if not radical_member(rf_delta(phi, spec).num, V.gens):
            continue
        if is_constant_on(V, phi):
            continue
        seen.add(key)
        seen.add(_rf_key(RationalFunction(phi.den, phi.num)))
        out.append(phi)
    out.sort(key=lambda r: (max(r.num.degree(), r.den.degree()), str(r)))
    return out


# ---------------------------------------------------------------------------
# dominance and generic finiteness


@dataclass(frozen=True)
class ImageReport:
    image_closure: tuple     # generators in the target context
    image_dimension: int | None
    source_dimension: int | None
    target_dimension: int | None
    dominant: bool
    generically_finite: bool


def _is_prime_claimed(V: Variety) -> bool:
    return "prime" in V.claims or not V.gens


def image_closure(f: RationalMap) -> ImageReport:
    src, tgt = _variety(f.source), _variety(f.target)
    if not _is_prime_claimed(tgt):
        raise NotIrreducible("target not claimed irreducible")
    sc, tc = src.ctx, tgt.ctx
    taken = set(sc.vars) | set(sc.params)
    rename = {}
    for v in tc.vars:
        name = v
        while name in taken:
            name += "'"
        taken.add(name)
        rename[v] = name
    z = "z"
    while z in taken:
        z += "_"
    big = sc.extend([rename[v] for v in tc.vars] + [z])
    gens = [g.to_context(big) for g in src.gens]
    inv = big.one()
    for v, c in zip(tc.vars, f.components):
        y = big.var(rename[v])
        gens.append(c.den.to_context(big) * y - c.num.to_context(big))
        if not c.den.is_constant():
            inv = inv * c.den.to_context(big)
    gens.append(big.one() - big.var(z) * inv)
    J = eliminate(gens, list(sc.vars) + [z], ctx=big)
    back = {rename[v]: v for v in tc.vars}
    image = RingContext(tuple(rename[v] for v in tc.vars), tc.field)
    J = tuple(g.to_context(image).to_context(tc, back) for g in J)
    dim_img = krull_dimension(list(J), ctx=tc)
    dim_tgt = krull_dimension(list(tgt.gens), ctx=tc)
    dim_src = krull_dimension(list(src.gens), ctx=sc)
    dominant = dim_img == dim_tgt and all(radical_member(g, tgt.gens) if tgt.gens else not g for g in J)
    return ImageReport(J, dim_img, dim_src, dim_tgt, dominant, dim_src == dim_img)


def is_dominant(f: RationalMap) -> bool:
    return image_closure(f).dominant


def is_generically_finite(f: RationalMap) -> bool:
    return image_closure(f).generically_finite
