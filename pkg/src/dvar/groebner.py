"""Buchberger's algorithm and the ideal-theoretic queries built on it.

Everything here works on the raw ``{exponent: coefficient}`` dicts of
:class:`~dvar.poly.Polynomial` for speed; public functions take and return
Polynomials.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from .poly import ContextMismatch, Polynomial, RingContext, grevlex_key

__all__ = [
    "MonomialOrder",
    "LEX",
    "GREVLEX",
    "GroebnerBasis",
    "MembershipCertificate",
    "groebner",
    "normal_form",
    "ideal_member",
    "radical_member",
    "radical_equal",
    "eliminate",
    "krull_dimension",
    "s_polynomial",
]


@dataclass(frozen=True)
class MonomialOrder:
    """lex, grevlex, or block(k): grevlex on the first k variables, ties by grevlex on the rest."""

    kind: str = "grevlex"
    split: int = 0

    def __post_init__(self):
        if self.kind not in ("lex", "grevlex", "block"):
            raise ValueError(f"unknown monomial order {self.kind!r}")

    def key(self):
        if self.kind == "lex":
            return _lex_key
        if self.kind == "grevlex":
            return grevlex_key
        k = self.split

        def block(exp):
            return (grevlex_key(exp[:k]), grevlex_key(exp[k:]))

        return block

    def __str__(self):
        return f"block({self.split})" if self.kind == "block" else self.kind


def _lex_key(exp):
    return exp


LEX = MonomialOrder("lex")
GREVLEX = MonomialOrder("grevlex")


def _divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def _lcm(a, b):
    return tuple(max(x, y) for x, y in zip(a, b))


def _sub_mul(p: dict, c, m, g: dict):
    """p -= c * x^m * g, in place."""
    for e, v in g.items():
        e2 = tuple(a + b for a, b in zip(e, m))
        nv = p.get(e2)
        if nv is None:
            p[e2] = -c * v
        else:
            nv = nv - c * v
            if nv:
                p[e2] = nv
            else:
                del p[e2]


def _monic(p: dict, key):
    lm = max(p, key=key)
    inv = 1 / p[lm]
    return {e: c * inv for e, c in p.items()}, lm


def _reduce(p: dict, basis, key, cofactors=None):
    """Full reduction of p by basis [(lm, poly)] (monic).  Returns the remainder dict."""
    p = dict(p)
    rem = {}
    while p:
        lm = max(p, key=key)
        c = p[lm]
        for i, (glm, g) in enumerate(basis):
            if _divides(glm, lm):
                m = tuple(a - b for a, b in zip(lm, glm))
                if cofactors is not None:
                    q = cofactors[i]
                    q[m] = q.get(m, 0) + c
                    if not q[m]:
                        del q[m]
                _sub_mul(p, c, m, g)
                break
        else:
            rem[lm] = c
            del p[lm]
    return rem


def _s_poly(f, flm, g, glm):
    L = _lcm(flm, glm)
    s = {}
    mf = tuple(a - b for a, b in zip(L, flm))
    mg = tuple(a - b for a, b in zip(L, glm))
    for e, c in f.items():
        s[tuple(a + b for a, b in zip(e, mf))] = c
    _sub_mul(s, 1, mg, g)
    return s


def _buchberger(polys, key, n):
    """Reduced Groebner basis of monic dicts; returns list of (lm, poly) sorted descending."""
    one = (0,) * n
    G = []
    pairs = set()

    def add(h):
        h, hlm = _monic(h, key)
        G.append((hlm, h))
        j = len(G) - 1
        for i in range(j):
            pairs.add((i, j))
        return hlm == one

    for f in polys:
        r = _reduce(f, G, key)
        if r and add(r):
            return [G[-1]]

    while pairs:
        # normal selection strategy: smallest lcm first
        i, j = min(pairs, key=lambda ij: (sum(_lcm(G[ij[0]][0], G[ij[1]][0])),
                                           key(_lcm(G[ij[0]][0], G[ij[1]][0])), ij))
        pairs.discard((i, j))
        ilm, gi = G[i]
        jlm, gj = G[j]
        L = _lcm(ilm, jlm)
        if all(a == 0 or b == 0 for a, b in zip(ilm, jlm)):
            continue
        if any(k != i and k != j and _divides(G[k][0], L)
               and (min(i, k), max(i, k)) not in pairs
               and (min(j, k), max(j, k)) not in pairs
               for k in range(len(G))):
            continue
        r = _reduce(_s_poly(gi, ilm, gj, jlm), G, key)
        if r and add(r):
            return [G[-1]]

    # minimalize then interreduce
    minimal = []
    for idx, (lm, g) in enumerate(G):
        if any(_divides(olm, lm) and (olm != lm or o < idx) for o, (olm, _) in enumerate(G) if o != idx):
            continue
        minimal.append((lm, g))
    reduced = []
    for idx, (lm, g) in enumerate(minimal):
        others = [b for o, b in enumerate(minimal) if o != idx]
        tail = {e: c for e, c in g.items() if e != lm}
        r = _reduce(tail, others, key)
        r[lm] = g[lm]
        reduced.append((lm, r))
    reduced.sort(key=lambda t: key(t[0]), reverse=True)
    return reduced


def _zero_dimensional(basis, n):
    """Every variable has a pure power among the leading monomials."""
    pure = {next(i for i, k in enumerate(lm) if k) for lm, _ in basis
            if sum(1 for k in lm if k) == 1}
    return len(pure) == n


def _fglm(basis, src_key, key, n):
    """Convert a reduced zero-dimensional basis to the order ``key`` by linear algebra on normal forms."""
    one = (0,) * n
    lm0, g0 = basis[0]
    unit = g0[lm0]      # the field's 1, so no Python int leaks into the coefficients
    staircase = []      # standard monomials of the new order, in increasing order
    echelon = []        # (pivot monomial, row, combination over staircase indices)
    new = []
    new_lms = []
    normal = {one: _reduce({one: unit}, basis, src_key)}
    todo = {one}
    done = set()
    while todo:
        m = min(todo, key=key)
        todo.discard(m)
        done.add(m)
        if any(_divides(lm, m) for lm in new_lms):
            continue
        row = dict(normal[m])
        combo = {}
        for piv, erow, ecombo in echelon:
            c = row.get(piv)
            if c:
                _axpy(row, -c, erow)
                _axpy(combo, -c, ecombo)
        if not row:
            # m + sum combo[i] * staircase[i] lies in the ideal
            g = {m: unit}
            for i, c in combo.items():
                g[staircase[i]] = c
            new.append((m, g))
            new_lms.append(m)
            continue
        idx = len(staircase)
        staircase.append(m)
        piv = max(row, key=src_key)
        inv = 1 / row[piv]
        combo[idx] = unit
        echelon.append((piv, {e: c * inv for e, c in row.items()},
                        {i: c * inv for i, c in combo.items()}))
        for v in range(n):
            m2 = tuple(k + (i == v) for i, k in enumerate(m))
            if m2 not in done and m2 not in normal:
                # multiply the known normal form by x_v, then reduce
                shifted = {tuple(k + (i == v) for i, k in enumerate(e)): c for e, c in normal[m].items()}
                normal[m2] = _reduce(shifted, basis, src_key)
                todo.add(m2)
            elif m2 not in done:
                todo.add(m2)
    new.sort(key=lambda t: key(t[0]), reverse=True)
    return new


def _axpy(y: dict, a, x: dict):
    """y += a * x, in place."""
    for e, c in x.items():
        v = y.get(e, 0) + a * c
        if v:
            y[e] = v
        else:
            y.pop(e, None)


def _compute(polys, order, n):
    """Reduced basis in ``order``.  Zero-dimensional ideals go through grevlex and FGLM, which is
    far cheaper than running Buchberger in an elimination order."""
    key = order.key()
    if order == GREVLEX:
        return _buchberger(polys, key, n)
    base = _buchberger(polys, grevlex_key, n)
    one = (0,) * n
    if len(base) == 1 and base[0][0] == one:
        return base
    if _zero_dimensional(base, n):
        return _fglm(base, grevlex_key, key, n)
    return _buchberger(polys, key, n)


@dataclass(frozen=True)
class GroebnerBasis:
    """A reduced Groebner basis: monic, interreduced, sorted by leading monomial (descending)."""

    ctx: RingContext
    order: MonomialOrder
    gens: tuple
    source: tuple = field(compare=False)

    @property
    def leading_monomials(self):
        key = self.order.key()
        return tuple(max(g.terms, key=key) for g in self.gens)

    def is_unit(self) -> bool:
        return len(self.gens) == 1 and self.gens[0].is_constant()

    def is_zero(self) -> bool:
        return not self.gens

    def reduce(self, f: Polynomial) -> Polynomial:
        return normal_form(f, self).remainder

    def contains(self, f: Polynomial) -> bool:
        return not self.reduce(f)

    def _basis(self):
        key = self.order.key()
        return [(max(g.terms, key=key), g.terms) for g in self.gens]

    def __iter__(self):
        return iter(self.gens)

    def __len__(self):
        return len(self.gens)


@dataclass(frozen=True)
class MembershipCertificate:
    """f == sum(cofactors[i] * basis[i]) + remainder."""

    cofactors: tuple
    remainder: Polynomial
    basis: tuple

    def reconstruct(self) -> Polynomial:
        total = self.remainder
        for q, g in zip(self.cofactors, self.basis):
            total = total + q * g
        return total

    @property
    def is_member(self) -> bool:
        return not self.remainder


_cache: dict = {}
_cache_lock = threading.Lock()


def _check_ctx(polys: Sequence[Polynomial], ctx: RingContext | None = None):
    if ctx is None:
        if not polys:
            raise ValueError("context required for an empty generator list")
        ctx = polys[0].ctx
    for p in polys:
        if p.ctx != ctx:
            raise ContextMismatch("generators live in different contexts")
    return ctx


def groebner(gens: Sequence[Polynomial], order: MonomialOrder = GREVLEX,
             ctx: RingContext | None = None) -> GroebnerBasis:
    """Reduced Groebner basis of <gens>.  <0> gives the empty basis, <1> gives {1}."""
    ctx = _check_ctx(gens, ctx)
    source = tuple(gens)
    ck = (ctx, order, frozenset(g for g in source if g))
    with _cache_lock:
        hit = _cache.get(ck)
    if hit is not None:
        return GroebnerBasis(ctx, order, hit, source)
    key = order.key()
    polys = [dict(g.terms) for g in source if g]
    # deterministic start: ascending leading monomial
    polys.sort(key=lambda p: key(max(p, key=key)))
    basis = _compute(polys, order, ctx.nvars) if polys else []
    out = tuple(Polynomial(ctx, g, _trusted=True) for _, g in basis)
    with _cache_lock:
        if len(_cache) > 4096:
            _cache.clear()
        _cache[ck] = out
    return GroebnerBasis(ctx, order, out, source)


def normal_form(f: Polynomial, gb: GroebnerBasis) -> MembershipCertificate:
    if f.ctx != gb.ctx:
        raise ContextMismatch("polynomial and basis live in different contexts")
    key = gb.order.key()
    cof = [dict() for _ in gb.gens]
    rem = _reduce(f.terms, gb._basis(), key, cof)
    ctx = gb.ctx
    return MembershipCertificate(
        tuple(Polynomial(ctx, q, _trusted=True) for q in cof),
        Polynomial(ctx, rem, _trusted=True),
        gb.gens,
    )


def s_polynomial(f: Polynomial, g: Polynomial, order: MonomialOrder = GREVLEX) -> Polynomial:
    key = order.key()
    fm, flm = _monic(f.terms, key)
    gm, glm = _monic(g.terms, key)
    return Polynomial(f.ctx, _s_poly(fm, flm, gm, glm), _trusted=True)


def ideal_member(f: Polynomial, gens: Sequence[Polynomial]):
    """(f in <gens>, certificate)."""
    gb = groebner(list(gens), ctx=f.ctx)
    cert = normal_form(f, gb)
    return cert.is_member, cert


def radical_member(f: Polynomial, gens: Sequence[Polynomial]) -> bool:
    """f in sqrt(<gens>), via 1 in <gens, 1 - t*f> with a fresh variable t."""
    if not f:
        return True
    ctx = f.ctx
    _check_ctx(gens, ctx)
    gb = groebner(list(gens), ctx=ctx)
    # cheap witnesses first: a small power of f already in the ideal
    power = f
    for _ in range(3):
        if gb.contains(power):
            return True
        power = power * f
    t = ctx.fresh("t")
    big = ctx.extend([t])
    lifted = [g.to_context(big) for g in gens]
    lifted.append(big.one() - big.var(t) * f.to_context(big))
    return groebner(lifted, ctx=big).is_unit()


def radical_equal(gens_a: Sequence[Polynomial], gens_b: Sequence[Polynomial],
                  ctx: RingContext | None = None) -> bool:
    ctx = _check_ctx(list(gens_a) + list(gens_b), ctx)
    return (all(radical_member(f, gens_b) if gens_b else not f for f in gens_a)
            and all(radical_member(f, gens_a) if gens_a else not f for f in gens_b))


def eliminate(gens: Sequence[Polynomial], drop, ctx: RingContext | None = None) -> list:
    """Generators of <gens> intersected with the subring omitting the variables in ``drop``."""
    ctx = _check_ctx(gens, ctx)
    drop = [v for v in ctx.vars if v in set(drop)]
    unknown = set(drop) - set(ctx.vars)
    if unknown:
        raise KeyError(f"unknown variables {sorted(unknown)}")
    if not drop:
        return [g for g in groebner(list(gens), ctx=ctx)]
    keep = [v for v in ctx.vars if v not in drop]
    work = ctx.with_vars(drop + keep)
    gb = groebner([g.to_context(work) for g in gens], MonomialOrder("block", len(drop)), ctx=work)
    k = len(drop)
    out = [g for g in gb if all(not any(e[:k]) for e in g.terms)]
    return [g.to_context(ctx) for g in out]


def krull_dimension(gens: Sequence[Polynomial], ctx: RingContext | None = None):
    """Dimension of V(gens); None when the variety is empty."""
    ctx = _check_ctx(gens, ctx)
    gb = groebner(list(gens), GREVLEX, ctx=ctx)
    if gb.is_unit():
        return None
    lms = gb.leading_monomials
    n = ctx.nvars
    supports = [frozenset(i for i, k in enumerate(m) if k) for m in lms]
    for size in range(n, -1, -1):
        for subset in combinations(range(n), size):
            s = frozenset(subset)
            if all(not sup <= s for sup in supports):
                return size
    return 0
