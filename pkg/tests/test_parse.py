import re

import pytest

from dvar.parse import ParseError, parse_expression, parse_polynomial, parse_rational, tokenize
from dvar.poly import Polynomial, RationalFunction
from dvar.session import SessionError, load_session

from conftest import make_ctx
from corpus import KOLCHIN, POIZAT, POIZAT_ODE, TRANSLATION

XYZ = make_ctx(("x", "y", "z"))
XC = make_ctx(("x",), ("c",))


def test_grammar_examples():
    f = parse_polynomial("x*z - 1", XYZ)
    assert f == XYZ.var("x") * XYZ.var("z") - 1
    g = parse_polynomial("-y*z^2", XYZ)
    assert len(g.terms) == 1 and str(g) == "-y*z^2"
    h = parse_polynomial("3/4*x + c", XC)
    assert str(h) == "3/4*x + c"


def test_precedence():
    assert str(parse_polynomial("-x^2", XYZ)) == "-x^2"
    assert str(parse_polynomial("2*x^2*y", XYZ)) == "2*x^2*y"
    assert str(parse_polynomial("(x + y)^2 - x*(x + 2*y)", XYZ)) == "y^2"
    assert str(parse_polynomial("1 - - x", XYZ)) == "x + 1"


def test_division_rules():
    assert str(parse_polynomial("x/2", XYZ)) == "1/2*x"
    assert str(parse_polynomial("x/(c + 1)", XC)) == "(1/(c + 1))*x"
    with pytest.raises(ParseError, match="polynomial-only"):
        parse_polynomial("x/(x + 1)", XYZ)
    r = parse_rational("x/(x + 1)", XYZ)
    assert isinstance(r, RationalFunction) and str(r) == "x/(x + 1)"
    assert isinstance(parse_expression("x + 1", XYZ, rational=True), Polynomial)
    with pytest.raises(ParseError, match="division by zero"):
        parse_polynomial("1/0", XYZ)


@pytest.mark.parametrize("text,col,message", [
    ("x +", 4, "end of expression"),
    ("x + q", 5, "unknown identifier"),
    ("2^x", 3, "natural number"),
    ("x $ y", 3, "unexpected character"),
    ("(x + 1", 7, "expected ')'"),
    ("", 1, "empty expression"),
    ("x y", 3, "unexpected 'y'"),
])
def test_errors_carry_positions(text, col, message):
    with pytest.raises(ParseError, match=re.escape(message)) as info:
        parse_polynomial(text, XYZ)
    assert (info.value.line, info.value.col) == (1, col)


def test_tokenize_offsets():
    toks = tokenize("x +\n  y", line=3, col=5)
    assert [(t.text, t.line, t.col) for t in toks] == [("x", 3, 5), ("+", 3, 7), ("y", 4, 3), ("", 4, 4)]


# -- session documents ----------------------------------------------------------


def test_poizat_document():
    doc = load_session(POIZAT)
    V = doc.varieties["V"]
    assert [str(g) for g in V.gens] == ["x*z - 1"]
    assert V.claims == frozenset({"prime"})
    vname, s = doc.sections["s"]
    assert vname == "V" and [str(c) for c in s.components] == ["y", "y*z", "-y*z^2"]
    assert doc.kind("s") == "section" and doc.kind("nope") is None


def test_ode_documents():
    doc = load_session(KOLCHIN + POIZAT_ODE)
    assert doc.odes["K"].order == 1 and not doc.odes["K"].is_implicit
    assert doc.odes["P"].is_implicit


def test_translation_document():
    doc = load_session(TRANSLATION)
    assert doc.field.params == ("d0",)
    decl = doc.maps["f"]
    assert (decl.source, decl.target) == ("L", "T")
    assert [str(c) for c in decl.components] == ["x - d0"]


def test_comments_and_repeated_gens():
    doc = load_session("""\
# a comment
ring:
  vars = x, y   # trailing comment
variety C:
  gen = x^2 + y^2 - 1
  gen = x - y
""")
    assert len(doc.varieties["C"].gens) == 2


@pytest.mark.parametrize("text,line,message", [
    ("variety V:\n  gens = x\n", 2, "unknown identifier"),
    ("ring:\n  vars = x\nvariety V:\n  gens = x\nvariety V:\n  gens = x\n", 5, "defined twice"),
    ("ring:\n  vars = x\nsection s on W:\n  x = 1\n", 3, "unknown variety"),
    ("ring:\n  vars = x\nvariety V:\n  gens = x\nsection s on V:\n  y = 1\n", 6, "not a variable"),
    ("ring:\n  vars = x\nvariety V:\n  gens = x\nsection s on V:\n", 5, "no value"),
    ("ring:\n  vars = x\nvariety V:\n  gens = x, x - 1\n", 3, "empty"),
    ("ring:\n  vars = x\nnonsense here\n", 3, "block header"),
    ("  x = 1\n", 1, "outside of any block"),
    ("ode K:\n  order = 0\n  rhs = 1\n", 2, "positive integer"),
    ("ode K:\n  order = 1\n", 1, "exactly one of"),
    ("ode K:\n  order = 1\n  rhs = u1\n", 1, "may not involve"),
    ("ring:\n  params = c\n  delta e = 1\n", 3, "unknown parameter"),
    ("ring:\n  vars = x\nvariety V:\n  gens = x\nring:\n  vars = y\n", 5, "more than one ring"),
    ("ring:\n  vars = x\nvariety V:\n  gens = x\nmap f: V -> W\n  t = x\n", 5, "unknown variety"),
])
def test_document_errors(text, line, message):
    with pytest.raises(SessionError, match=message) as info:
        load_session(text)
    assert info.value.line == line


def test_expression_error_columns_in_documents():
    with pytest.raises(SessionError) as info:
        load_session("ring:\n  vars = x\nvariety V:\n  gens = x, x +\n")
    assert (info.value.line, info.value.col) == (4, 16)
