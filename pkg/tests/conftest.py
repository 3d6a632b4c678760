from fractions import Fraction
from itertools import product as iproduct

from hypothesis import HealthCheck, settings, strategies as st

from dvar.poly import Polynomial, RingContext

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# the base fields used by randomized suites
PARAM_SETS = [
    ((), {}),
    (("c",), {"c": "1"}),
    (("c",), {"c": "c"}),
    (("c", "e"), {"c": "1", "e": "c*e"}),
    (("c", "e"), {"c": "e", "e": "0"}),
]
VAR_SETS = [("x",), ("x", "y"), ("x", "y", "z")]


def make_ctx(vars, params=(), deltas=None):
    from dvar.field import BaseField
    from dvar.session import parse_constant

    bare = BaseField(params)
    d = {p: parse_constant(t, bare) for p, t in (deltas or {}).items()}
    return RingContext(tuple(vars), BaseField(params, d))


_CTX_CACHE = {}


def ctx_for(vi, pi):
    key = (vi, pi)
    if key not in _CTX_CACHE:
        params, deltas = PARAM_SETS[pi]
        _CTX_CACHE[key] = make_ctx(VAR_SETS[vi], params, deltas)
    return _CTX_CACHE[key]


contexts = st.builds(ctx_for, st.integers(0, len(VAR_SETS) - 1), st.integers(0, len(PARAM_SETS) - 1))
small_rationals = st.builds(Fraction, st.integers(-5, 5), st.integers(1, 4))


@st.composite
def field_elements(draw, field, allow_quotient=True):
    """Small elements of Q(params): rational, rational * param monomial, or a quotient of those."""
    ctx = RingContext((), field)
    value = ctx.const(draw(small_rationals))
    for p in field.params:
        if draw(st.booleans()):
            value = value + ctx.param(p) ** draw(st.integers(1, 2)) * draw(small_rationals)
    c = value.constant_coeff()
    if allow_quotient and field.params and draw(st.booleans()):
        den = ctx.param(draw(st.sampled_from(field.params))) + draw(st.integers(1, 3))
        c = c / den.constant_coeff()
    return c


@st.composite
def polynomials(draw, ctx, max_degree=4, max_terms=4, coeffs=None):
    n = ctx.nvars
    exps = [e for e in iproduct(range(max_degree + 1), repeat=n) if sum(e) <= max_degree]
    chosen = draw(st.lists(st.sampled_from(exps), max_size=max_terms, unique=True))
    coeffs = field_elements(ctx.field) if coeffs is None else coeffs
    terms = {e: draw(coeffs) for e in chosen}
    return Polynomial(ctx, terms)


import gb_audit  # noqa: E402

gb_audit.install()

import pytest  # noqa: E402


@pytest.fixture(scope="session", autouse=True)
def groebner_session_audit():
    """After the whole run, every basis computed anywhere must pass its self-checks."""
    yield
    total, bad = gb_audit.audit_all()
    assert not bad, f"{len(bad)} of {total} computed Groebner bases failed their self-checks: {bad[:3]}"


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
