"""Session documents: one differential base field plus named geometry.

Example::

    ring:
      vars = x, y, z
      params = d0
      delta d0 = 1
    variety V:
      gens = x*z - 1
      claims = prime
    section s on V:
      x = y
      y = y*z
      z = -y*z^2
    map f: V -> W
      t = x - d0
    ode K:
      order = 1
      rhs = u0/(u0 + 1)

Names must be unique and defined before use.  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .dvariety import EmptyVariety, Section, Variety
from .field import BaseField
from .ode import OdeSpec, jet_context
from .parse import ParseError, parse_polynomial, parse_rational
from .poly import RingContext

__all__ = ["SessionError", "SessionDocument", "MapDecl", "load_session", "parse_constant"]


class SessionError(ParseError):
    pass


@dataclass(frozen=True)
class MapDecl:
    source: str
    target: str
    components: tuple


@dataclass
class SessionDocument:
    field: BaseField
    vars: tuple = ()
    varieties: dict = field(default_factory=dict)
    sections: dict = field(default_factory=dict)    # name -> (variety name, Section)
    maps: dict = field(default_factory=dict)
    odes: dict = field(default_factory=dict)

    def kind(self, name: str):
        for kind, table in (("variety", self.varieties), ("section", self.sections),
                            ("map", self.maps), ("ode", self.odes)):
            if name in table:
                return kind
        return None


_HEADERS = [
    ("ring", re.compile(r"ring\s*:\s*$")),
    ("variety", re.compile(r"variety\s+([A-Za-z_]\w*)\s*:\s*$")),
    ("section", re.compile(r"section\s+([A-Za-z_]\w*)\s+on\s+([A-Za-z_]\w*)\s*:\s*$")),
    ("map", re.compile(r"map\s+([A-Za-z_]\w*)\s*:\s*([A-Za-z_]\w*)\s*->\s*([A-Za-z_]\w*)\s*:?\s*$")),
    ("ode", re.compile(r"ode\s+([A-Za-z_]\w*)\s*:\s*$")),
]
_ENTRY = re.compile(r"([A-Za-z_][\w ]*?)\s*=\s*(.*)$")


@dataclass
class _Entry:
    key: str
    value: str
    line: int
    col: int      # column of the value


@dataclass
class _Block:
    kind: str
    args: tuple
    line: int
    entries: list = field(default_factory=list)


def _split_list(entry: _Entry):
    """Comma-separated pieces with their columns."""
    out = []
    col = entry.col
    for piece in entry.value.split(","):
        lead = len(piece) - len(piece.lstrip())
        if piece.strip():
            out.append((piece.strip(), col + lead))
        col += len(piece) + 1
    return out


def parse_constant(text: str, field_: BaseField, line: int = 1, col: int = 1):
    """An element of the base field written as an expression in the parameters."""
    ctx = RingContext((), field_)
    return parse_polynomial(text, ctx, line, col).constant_coeff()


def _blocks(text: str):
    blocks = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        indent = len(line) - len(line.lstrip())
        for kind, rx in _HEADERS:
            m = rx.match(stripped)
            if m and indent == 0:
                blocks.append(_Block(kind, m.groups(), lineno))
                break
        else:
            m = _ENTRY.match(stripped)
            if not m:
                raise SessionError("expected a block header or 'key = value'", lineno, indent + 1)
            if not blocks:
                raise SessionError("entry outside of any block", lineno, indent + 1)
            key = " ".join(m.group(1).split())
            value_col = indent + m.start(2) + 1
            blocks[-1].entries.append(_Entry(key, m.group(2), lineno, value_col))
    return blocks


def load_session(text: str) -> SessionDocument:
    blocks = _blocks(text)
    ring_blocks = [b for b in blocks if b.kind == "ring"]
    if len(ring_blocks) > 1:
        raise SessionError("more than one ring block", ring_blocks[1].line, 1)
    vars_, params, delta_entries = (), (), []
    if ring_blocks:
        rb = ring_blocks[0]
        if blocks[0] is not rb:
            raise SessionError("the ring block must come first", rb.line, 1)
        for e in rb.entries:
            if e.key == "vars":
                vars_ += tuple(p for p, _ in _split_list(e))
            elif e.key == "params":
                params += tuple(p for p, _ in _split_list(e))
            elif e.key.startswith("delta "):
                delta_entries.append(e)
            else:
                raise SessionError(f"unknown ring key {e.key!r}", e.line, 1)
    try:
        bare = BaseField(params)
        deltas = {}
        for e in delta_entries:
            name = e.key.split(None, 1)[1]
            if name not in params:
                raise SessionError(f"delta given for unknown parameter {name!r}", e.line, 1)
            if name in deltas:
                raise SessionError(f"delta of {name!r} given twice", e.line, 1)
            deltas[name] = parse_constant(e.value, bare, e.line, e.col)
        doc = SessionDocument(BaseField(params, deltas), vars_)
        RingContext(vars_, doc.field)
    except SessionError:
        raise
    except ValueError as exc:
        raise SessionError(str(exc), ring_blocks[0].line if ring_blocks else 1, 1) from None

    names = set()
    for b in blocks:
        if b.kind == "ring":
            continue
        name = b.args[0]
        if name in names:
            raise SessionError(f"name {name!r} defined twice", b.line, 1)
        try:
            _load_block(doc, b)
        except SessionError:
            raise
        except ParseError as exc:
            raise SessionError(exc.message, exc.line, exc.col) from None
        except (ValueError, KeyError) as exc:
            raise SessionError(str(exc).strip("'\""), b.line, 1) from None
        names.add(name)
    return doc


def _entries(b: _Block):
    seen = {}
    for e in b.entries:
        if e.key in seen and e.key not in ("gens", "gen"):
            raise SessionError(f"key {e.key!r} given twice", e.line, 1)
        seen[e.key] = e
    return seen


def _load_block(doc: SessionDocument, b: _Block):
    if b.kind == "variety":
        vars_ = doc.vars
        gens_src = []
        claims = set()
        for e in b.entries:
            if e.key == "vars":
                vars_ = tuple(p for p, _ in _split_list(e))
            elif e.key in ("gens", "gen"):
                gens_src.extend((t, e.line, c) for t, c in _split_list(e))
            elif e.key == "claims":
                claims.update(p for p, _ in _split_list(e))
            else:
                raise SessionError(f"unknown variety key {e.key!r}", e.line, 1)
        ctx = RingContext(vars_, doc.field)
        gens = tuple(parse_polynomial(t, ctx, line, col) for t, line, col in gens_src)
        try:
            doc.varieties[b.args[0]] = Variety(ctx, gens, frozenset(claims))
        except EmptyVariety as exc:
            raise SessionError(str(exc), b.line, 1) from None
    elif b.kind == "section":
        name, vname = b.args
        V = doc.varieties.get(vname)
        if V is None:
            raise SessionError(f"unknown variety {vname!r}", b.line, 1)
        given = _entries(b)
        missing = [v for v in V.ctx.vars if v not in given]
        extra = [k for k in given if k not in V.ctx.vars]
        if extra:
            e = given[extra[0]]
            raise SessionError(f"{extra[0]!r} is not a variable of {vname}", e.line, 1)
        if missing:
            raise SessionError(f"section {name} gives no value for {missing}", b.line, 1)
        comps = tuple(parse_polynomial(given[v].value, V.ctx, given[v].line, given[v].col) for v in V.ctx.vars)
        doc.sections[name] = (vname, Section(comps))
    elif b.kind == "map":
        name, src, tgt = b.args
        for n in (src, tgt):
            if n not in doc.varieties:
                raise SessionError(f"unknown variety {n!r}", b.line, 1)
        S, T = doc.varieties[src], doc.varieties[tgt]
        given = _entries(b)
        missing = [v for v in T.ctx.vars if v not in given]
        extra = [k for k in given if k not in T.ctx.vars]
        if extra:
            e = given[extra[0]]
            raise SessionError(f"{extra[0]!r} is not a variable of {tgt}", e.line, 1)
        if missing:
            raise SessionError(f"map {name} gives no component for {missing}", b.line, 1)
        comps = tuple(parse_rational(given[v].value, S.ctx, given[v].line, given[v].col) for v in T.ctx.vars)
        doc.maps[name] = MapDecl(src, tgt, comps)
    elif b.kind == "ode":
        given = _entries(b)
        for k, e in given.items():
            if k not in ("order", "rhs", "equation"):
                raise SessionError(f"unknown ode key {k!r}", e.line, 1)
        if "order" not in given:
            raise SessionError("ode block needs 'order'", b.line, 1)
        oe = given["order"]
        try:
            L = int(oe.value)
        except ValueError:
            raise SessionError("order must be a positive integer", oe.line, oe.col) from None
        if L < 1:
            raise SessionError("order must be a positive integer", oe.line, oe.col)
        ctx = jet_context(L, doc.field)
        if ("rhs" in given) == ("equation" in given):
            raise SessionError("ode block needs exactly one of 'rhs' or 'equation'", b.line, 1)
        if "rhs" in given:
            e = given["rhs"]
            spec = OdeSpec.explicit(L, parse_rational(e.value, ctx, e.line, e.col))
        else:
            e = given["equation"]
            spec = OdeSpec.implicit(L, parse_polynomial(e.value, ctx, e.line, e.col))
        doc.odes[b.args[0]] = spec
