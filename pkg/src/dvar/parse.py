"""Recursive-descent parser for polynomial and rational-function expressions.

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := base ('^' natural)?
    base   := integer | identifier | '(' expr ')'

Unary minus binds looser than ``^`` (``-x^2`` is ``-(x^2)``).  Division is
allowed in a polynomial position only when the divisor is a nonzero element
of the base field (a number or an expression in the parameters).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .poly import Polynomial, RationalFunction, RingContext

__all__ = ["ParseError", "parse_expression", "parse_polynomial", "parse_rational", "tokenize"]


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, col: int = 1):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}")


@dataclass(frozen=True)
class Token:
    kind: str      # 'num', 'id', 'op', 'end'
    text: str
    line: int
    col: int


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|([-+*/^()]))")


def tokenize(text: str, line: int = 1, col: int = 1):
    tokens = []
    pos = 0
    n = len(text)
    while True:
        # skip whitespace, tracking position
        while pos < n and text[pos].isspace():
            if text[pos] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            pos += 1
        if pos >= n:
            tokens.append(Token("end", "", line, col))
            return tokens
        m = _TOKEN.match(text, pos)
        if not m or m.start(m.lastindex) != pos:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = {1: "num", 2: "id", 3: "op"}[m.lastindex]
        tok = m.group(m.lastindex)
        tokens.append(Token(kind, tok, line, col))
        col += len(tok)
        pos += len(tok)


class _Parser:
    def __init__(self, text, ctx: RingContext, rational: bool, line: int, col: int):
        self.toks = tokenize(text, line, col)
        self.i = 0
        self.ctx = ctx
        self.rational = rational

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def accept(self, text):
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def parse(self):
        if self.tok.kind == "end":
            self.error("empty expression")
        value = self.expr()
        if self.tok.kind != "end":
            self.error(f"unexpected {self.tok.text!r}")
        return value

    def expr(self):
        value = self.term()
        while True:
            if self.accept("+"):
                value = value + self.term()
            elif self.accept("-"):
                value = value - self.term()
            else:
                return value

    def term(self):
        value = self.unary()
        while True:
            if self.accept("*"):
                value = value * self.unary()
            elif self.tok.kind == "op" and self.tok.text == "/":
                slash = self.tok
                self.i += 1
                value = self.divide(value, self.unary(), slash)
            else:
                return value

    def divide(self, a, b, where: Token):
        if isinstance(b, Polynomial) and b.is_constant():
            if not b:
                self.error("division by zero", where)
            return a / b.constant_coeff() if isinstance(a, Polynomial) else a / b
        if not self.rational:
            self.error("division in a polynomial-only position", where)
        if isinstance(b, RationalFunction) and not b:
            self.error("division by zero", where)
        if isinstance(a, Polynomial):
            a = RationalFunction(a, _normalized=True)
        return a / b

    def unary(self):
        if self.accept("-"):
            return -self.unary()
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self):
        value = self.base()
        if self.accept("^"):
            if self.tok.kind != "num":
                self.error("exponent must be a natural number")
            k = int(self.tok.text)
            self.i += 1
            value = value ** k
        return value

    def base(self):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return self.ctx.const(int(tok.text))
        if tok.kind == "id":
            self.i += 1
            if tok.text in self.ctx.vars:
                return self.ctx.var(tok.text)
            if tok.text in self.ctx.params:
                return self.ctx.param(tok.text)
            self.error(f"unknown identifier {tok.text!r}", tok)
        if self.accept("("):
            value = self.expr()
            if not self.accept(")"):
                self.error("expected ')'")
            return value
        if tok.kind == "end":
            self.error("unexpected end of expression")
        self.error(f"unexpected {tok.text!r}")


def parse_expression(text: str, ctx: RingContext, rational: bool = False, line: int = 1, col: int = 1):
    """Polynomial, or RationalFunction when ``rational`` and a true quotient occurs."""
    return _Parser(text, ctx, rational, line, col).parse()


def parse_polynomial(text: str, ctx: RingContext, line: int = 1, col: int = 1) -> Polynomial:
    return parse_expression(text, ctx, False, line, col)


def parse_rational(text: str, ctx: RingContext, line: int = 1, col: int = 1) -> RationalFunction:
    value = parse_expression(text, ctx, True, line, col)
    if isinstance(value, Polynomial):
        return RationalFunction(value, _normalized=True)
    return value
