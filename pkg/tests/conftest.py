"""Shared helpers: independent integer oracles for a few constants."""

from fractions import Fraction
from math import isqrt

import mpmath
import pytest

from zetacf.dyadic import Dyadic


def frac(d) -> Fraction:
    return d.to_fraction() if isinstance(d, Dyadic) else Fraction(d)


def sqrt2_enclosure(bits: int):
    """[lo, hi] around sqrt(2) of width 2**-bits, by integer square root."""
    r = isqrt(2 << (2 * bits))
    return Fraction(r, 1 << bits), Fraction(r + 1, 1 << bits)


def e_enclosure(bits: int):
    """Taylor sum of 1/k! with tail < 2/(N+1)!."""
    total, term, k = Fraction(0), Fraction(1), 0
    while term > Fraction(1, 1 << (bits + 2)):
        total += term
        k += 1
        term /= k
    return total, total + 2 * term


def _atanh_inv(d: int, bits: int):
    """atanh(1/d) enclosure: partial sum plus geometric tail bound."""
    total, j = Fraction(0), 0
    while True:
        t = Fraction(1, (2 * j + 1) * d ** (2 * j + 1))
        if t < Fraction(1, 1 << (bits + 4)):
            # remaining terms < t * d^2 / (d^2 - 1)
            return total, total + t * Fraction(d * d, d * d - 1)
        total += t
        j += 1


def ln2_enclosure(bits: int):
    lo, hi = _atanh_inv(3, bits)
    return 2 * lo, 2 * hi


def _atan_inv(d: int, bits: int):
    """Alternating series: partial sums bracket the limit."""
    total, j, prev = Fraction(0), 0, None
    while True:
        t = Fraction((-1) ** j, (2 * j + 1) * d ** (2 * j + 1))
        nxt = total + t
        if abs(t) < Fraction(1, 1 << (bits + 4)):
            return min(total, nxt), max(total, nxt)
        total = nxt
        j += 1


def pi_enclosure(bits: int):
    a_lo, a_hi = _atan_inv(5, bits)
    b_lo, b_hi = _atan_inv(239, bits)
    return 16 * a_lo - 4 * b_hi, 16 * a_hi - 4 * b_lo


def near(d, lo, hi, n) -> bool:
    """The dyadic lies within 2**-n of some point of [lo, hi]."""
    x = frac(d)
    eps = Fraction(1, 1 << n) if n >= 0 else Fraction(1 << -n)
    return lo - eps <= x <= hi + eps


def mp(d):
    x = frac(d)
    return mpmath.mpf(x.numerator) / x.denominator


@pytest.fixture(autouse=True)
def _mp_precision():
    saved = mpmath.mp.prec
    mpmath.mp.prec = 2000
    yield
    mpmath.mp.prec = saved


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
