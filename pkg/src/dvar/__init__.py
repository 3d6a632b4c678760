"""Algebraic D-varieties over Q(params): exact polynomial algebra, Groebner bases,
sections and prolongations, ODE compilation, D-rational maps and first integrals."""

from .dmaps import *  # noqa: F401,F403
from .dvariety import *  # noqa: F401,F403
from .field import BaseField, QQ_FIELD
from .groebner import *  # noqa: F401,F403
from .ode import *  # noqa: F401,F403
from .parse import ParseError, parse_expression, parse_polynomial, parse_rational
from .poly import *  # noqa: F401,F403
from .session import SessionDocument, SessionError, load_session

__version__ = "0.1.0"
