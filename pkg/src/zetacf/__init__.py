"""Certified arbitrary-precision Riemann zeta evaluation.

Every result is a ball (center, radius exponent) whose radius is at most
``2**-n`` for the requested ``n``. Real arguments ``s > 1`` go through
:func:`zeta_real`; complex ``sigma + i t`` with ``sigma > 0`` through
:func:`zeta_complex`.
"""

from .approx import ApproxReal, Ball, ConstReal, EvalContext, FnReal, RationalReal, ResourceStats, as_real
from .dyadic import Dyadic, dy_from_decimal, dy_to_decimal
from .elementary import ComplexBall, ComplexDyadic
from .errors import ContractError, DomainError, ParseError, ResourceError, ZetaError
from .zeta_complex import zeta_complex
from .zeta_real import zeta_real

__version__ = "0.1.0"

__all__ = [
    "ApproxReal",
    "Ball",
    "ComplexBall",
    "ComplexDyadic",
    "ConstReal",
    "ContractError",
    "DomainError",
    "Dyadic",
    "EvalContext",
    "FnReal",
    "ParseError",
    "RationalReal",
    "ResourceError",
    "ResourceStats",
    "ZetaError",
    "as_real",
    "dy_from_decimal",
    "dy_to_decimal",
    "zeta_complex",
    "zeta_real",
]
