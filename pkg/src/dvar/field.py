"""The base differential field k = Q(c1, ..., cm) and its derivation.

Rationals are ``gmpy2.mpq`` (always reduced, positive denominator).  When
there are no parameters the field *is* Q and elements are plain ``mpq``;
otherwise elements are sympy ``FracElement`` values, which sympy keeps in
lowest terms so equality and hashing are structural.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Mapping

from gmpy2 import mpq
from sympy import QQ
from sympy.polys.fields import FracElement, field as _sympy_field

__all__ = ["BaseField", "QQ_FIELD", "mpq"]


class BaseField:
    """A purely transcendental differential field Q(params) with given delta(params)."""

    def __init__(self, params=(), deltas: Mapping[str, Any] | None = None):
        self.params = tuple(params)
        if len(set(self.params)) != len(self.params):
            raise ValueError(f"duplicate parameter names in {self.params}")
        if self.params:
            self._frac, *gens = _sympy_field(",".join(self.params), QQ)
            self.gens = tuple(gens)
        else:
            self._frac = None
            self.gens = ()
        deltas = dict(deltas or {})
        unknown = set(deltas) - set(self.params)
        if unknown:
            raise ValueError(f"delta given for non-parameters: {sorted(unknown)}")
        self.deltas = tuple(self(deltas.get(p, 0)) for p in self.params)
        self._key = (self.params, tuple(self.format(d) for d in self.deltas))

    # -- construction ---------------------------------------------------
    def __call__(self, value) -> Any:
        if isinstance(value, FracElement):
            if self._frac is None:
                if value.denom.is_ground and value.numer.is_ground:
                    return mpq(value.numer.LC) / mpq(value.denom.LC)
                raise ValueError(f"{value} is not a rational number")
            if value.field is self._frac:
                return value
            return self._frac.from_expr(value.as_expr())
        if isinstance(value, Fraction):
            value = mpq(value.numerator, value.denominator)
        elif isinstance(value, str):
            value = mpq(value)
        elif not isinstance(value, (int, type(mpq(0)))):
            raise TypeError(f"cannot convert {value!r} into the base field")
        else:
            value = mpq(value)
        return self._frac(value) if self._frac is not None else value

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def param(self, name: str):
        return self.gens[self.params.index(name)]

    # -- structure ------------------------------------------------------
    def __eq__(self, other):
        return isinstance(other, BaseField) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        if not self.params:
            return "BaseField(QQ)"
        ds = ", ".join(f"d({p})={self.format(d)}" for p, d in zip(self.params, self.deltas))
        return f"BaseField(QQ({', '.join(self.params)}); {ds})"

    def is_rational(self, a) -> bool:
        if self._frac is None:
            return True
        return a.numer.is_ground and a.denom.is_ground

    def to_rational(self, a):
        if self._frac is None:
            return a
        if not self.is_rational(a):
            raise ValueError(f"{self.format(a)} is not rational")
        return mpq(a.numer.LC) / mpq(a.denom.LC)

    def delta(self, a):
        """delta(a) via the Leibniz and quotient rules from delta on the parameters."""
        if self._frac is None:
            return mpq(0)
        out = self._frac.zero
        for g, d in zip(self.gens, self.deltas):
            if d:
                out += a.diff(g) * d
        return out

    def numer_denom(self, a):
        """(numerator, denominator) as sympy PolyElements over QQ in the params."""
        return a.numer, a.denom

    # -- printing -------------------------------------------------------
    def format(self, a) -> str:
        if self._frac is None:
            return str(mpq(a))
        num = format_terms(a.numer.terms(), self.params)
        if a.denom == 1:
            return num
        den = format_terms(a.denom.terms(), self.params)
        if len(a.numer.terms()) > 1:
            num = f"({num})"
        if len(a.denom.terms()) > 1 or not _is_bare_monomial(a.denom.terms()):
            den = f"({den})"
        return f"{num}/{den}"


def _is_bare_monomial(terms) -> bool:
    (exp, c), = terms
    return c == 1 and sum(exp) == 1


def _grevlex(exp):
    return (sum(exp), tuple(-e for e in reversed(exp)))


def format_monomial(exp, names) -> str:
    parts = []
    for e, name in zip(exp, names):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_terms(terms, names) -> str:
    """Canonical text for sum(c * monomial) with rational c, terms in descending grevlex."""
    terms = sorted(((tuple(e), mpq(c)) for e, c in terms if c), key=lambda t: _grevlex(t[0]), reverse=True)
    if not terms:
        return "0"
    out = []
    for i, (exp, c) in enumerate(terms):
        mono = format_monomial(exp, names)
        mag = abs(c)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        if i == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


QQ_FIELD = BaseField()
