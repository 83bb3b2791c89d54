"""Exact dyadic rationals ``m * 2**e`` with truncation as the only rounding mode."""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import ParseError, ResourceError

__all__ = [
    "Dyadic",
    "ZERO",
    "ONE",
    "dy_add",
    "dy_sub",
    "dy_mul",
    "dy_neg",
    "dy_round",
    "dy_cmp",
    "dy_from_fraction",
    "dy_from_decimal",
    "dy_to_decimal",
    "dy_to_hex",
    "dy_from_hex",
    "ceil_log2",
    "floor_log2",
]

# exponents live in a signed machine word
EXP_MAX = 2**62
EXP_MIN = -(2**62)


def _trailing_zeros(m: int) -> int:
    return (m & -m).bit_length() - 1


class Dyadic:
    """Immutable value ``mantissa * 2**exponent`` kept in canonical form.

    Canonical means the mantissa is odd, or the value is zero and then both
    fields are zero. Two dyadics are equal exactly when their fields are.
    """

    __slots__ = ("_m", "_e")

    def __init__(self, mantissa: int = 0, exponent: int = 0):
        m = int(mantissa)
        e = int(exponent)
        if m == 0:
            e = 0
        elif not m & 1:
            tz = _trailing_zeros(m)
            m >>= tz
            e += tz
        if e > EXP_MAX or e < EXP_MIN:
            raise ResourceError(f"dyadic exponent {e} outside machine range")
        self._m = m
        self._e = e

    @property
    def mantissa(self) -> int:
        return self._m

    @property
    def exponent(self) -> int:
        return self._e

    # -- conversions -------------------------------------------------------

    @classmethod
    def from_int(cls, value: int) -> Dyadic:
        return cls(value, 0)

    def to_fraction(self) -> Fraction:
        if self._e >= 0:
            return Fraction(self._m << self._e)
        return Fraction(self._m, 1 << -self._e)

    def __float__(self) -> float:
        return float(self.to_fraction())

    def is_zero(self) -> bool:
        return self._m == 0

    def is_integer(self) -> bool:
        return self._e >= 0 or self._m == 0

    def fixed(self, w: int) -> int:
        """Return ``floor(self * 2**w)`` as an integer (exact when representable)."""
        shift = self._e + w
        if shift >= 0:
            return self._m << shift
        return self._m >> -shift

    def frac_bits(self) -> int:
        """Number of bits after the binary point."""
        return max(0, -self._e)

    def bits(self) -> int:
        return self._m.bit_length()

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return dy_add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return dy_add(self, dy_neg(other))

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return dy_add(other, dy_neg(self))

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return dy_mul(self, other)

    __rmul__ = __mul__

    def __neg__(self) -> Dyadic:
        return dy_neg(self)

    def __abs__(self) -> Dyadic:
        return self if self._m >= 0 else dy_neg(self)

    def __lshift__(self, k: int) -> Dyadic:
        return Dyadic(self._m, self._e + k)

    def __rshift__(self, k: int) -> Dyadic:
        return Dyadic(self._m, self._e - k)

    # -- comparison --------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Dyadic):
            return self._m == other._m and self._e == other._e
        if isinstance(other, (int, Fraction)):
            return self.to_fraction() == other
        return NotImplemented

    def __hash__(self):
        return hash((self._m, self._e))

    def __lt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return dy_cmp(self, other) < 0

    def __le__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return dy_cmp(self, other) <= 0

    def __gt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return dy_cmp(self, other) > 0

    def __ge__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return dy_cmp(self, other) >= 0

    def __bool__(self) -> bool:
        return self._m != 0

    def __repr__(self) -> str:
        return f"Dyadic({self._m}, {self._e})"

    def __str__(self) -> str:
        return dy_to_hex(self)


ZERO = Dyadic(0)
ONE = Dyadic(1)


def _coerce(x):
    if isinstance(x, Dyadic):
        return x
    if isinstance(x, int):
        return Dyadic(x)
    return NotImplemented


def dy_add(a: Dyadic, b: Dyadic) -> Dyadic:
    if a._m == 0:
        return b
    if b._m == 0:
        return a
    e = min(a._e, b._e)
    return Dyadic((a._m << (a._e - e)) + (b._m << (b._e - e)), e)


def dy_neg(a: Dyadic) -> Dyadic:
    return Dyadic(-a._m, a._e)


def dy_sub(a: Dyadic, b: Dyadic) -> Dyadic:
    return dy_add(a, dy_neg(b))


def dy_mul(a: Dyadic, b: Dyadic) -> Dyadic:
    return Dyadic(a._m * b._m, a._e + b._e)


def dy_round(a: Dyadic, n: int) -> Dyadic:
    """Drop every bit below ``2**-n``, truncating toward zero."""
    if n < 0:
        raise ValueError("precision must be nonnegative")
    if a._e >= -n:
        return a
    shift = -n - a._e
    m = a._m
    if m >= 0:
        return Dyadic(m >> shift, -n)
    return Dyadic(-((-m) >> shift), -n)


def dy_cmp(a: Dyadic, b: Dyadic) -> int:
    """Three-way comparison: -1, 0 or 1."""
    d = dy_sub(a, b)._m
    return (d > 0) - (d < 0)


def floor_log2(a: Dyadic) -> int:
    """Largest ``k`` with ``2**k <= |a|``; ``a`` must be nonzero."""
    if a._m == 0:
        raise ValueError("floor_log2 of zero")
    return abs(a._m).bit_length() - 1 + a._e


def ceil_log2(a: Dyadic) -> int:
    """Smallest ``k`` with ``|a| <= 2**k``; ``a`` must be nonzero."""
    if a._m == 0:
        raise ValueError("ceil_log2 of zero")
    m = abs(a._m)
    k = m.bit_length() - 1 + a._e
    # odd mantissa: exact power of two only when m == 1
    return k if m == 1 else k + 1


def dy_from_fraction(x: Fraction, n: int) -> Dyadic:
    """Exact when ``x`` is dyadic, otherwise truncated toward zero at ``2**-n``."""
    num, den = x.numerator, x.denominator
    if den & (den - 1) == 0:
        return Dyadic(num, -(den.bit_length() - 1))
    q = (abs(num) << n) // den
    return Dyadic(q if num >= 0 else -q, -n)


_DECIMAL_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def parse_decimal(text: str) -> Fraction:
    """Parse a signed decimal numeral into an exact rational."""
    t = text.strip()
    if not _DECIMAL_RE.match(t):
        raise ParseError(f"malformed decimal numeral: {text!r}")
    return Fraction(t)


def dy_from_decimal(text: str, n: int) -> Dyadic:
    return dy_from_fraction(parse_decimal(text), n)


def dy_to_decimal(a: Dyadic, digits: int) -> str:
    """Decimal string with ``digits`` fractional digits, truncated toward zero."""
    f = a.to_fraction()
    q = abs(f.numerator) * 10**digits // f.denominator
    sign = "-" if f < 0 and q else ""
    s = str(q).rjust(digits + 1, "0")
    if digits == 0:
        return sign + s
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


def dy_to_hex(a: Dyadic) -> str:
    """Bit-exact debug form ``±0x<mantissa>p<exponent>``."""
    sign = "-" if a._m < 0 else "+"
    return f"{sign}0x{abs(a._m):x}p{a._e}"


_HEX_RE = re.compile(r"^\s*([+-])?\s*(0[xX])?([0-9a-fA-F]+)\s*[pP]\s*([+-]?\d+)\s*$")


def dy_from_hex(text: str) -> Dyadic:
    m = _HEX_RE.match(text)
    if not m:
        raise ParseError(f"malformed hex-dyadic: {text!r}")
    mant = int(m.group(3), 16)
    if m.group(1) == "-":
        mant = -mant
    return Dyadic(mant, int(m.group(4)))
