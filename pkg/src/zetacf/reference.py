"""Independent reference values for zeta and eta.

None of these call the series pipeline. Arithmetic runs in mpmath's
interval context, so every returned radius covers rounding as well as the
explicit truncation bounds:

* :func:`oracle_zeta_dirichlet` sums k**-s directly and encloses the tail
  with Euler-Maclaurin;
* :func:`oracle_eta_alternating` sums the alternating series directly when the
  first omitted term is small enough, otherwise uses the Chebyshev
  acceleration of Cohen, Rodriguez Villegas and Zagier with its
  ``eta / T_N(3)`` error bound;
* :func:`oracle_zeta_euler_maclaurin` handles complex s with sigma > 0.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import mpmath
from mpmath import iv
from mpmath.libmp import finf, fnan, fninf

from .approx import Ball, ceil_log2_frac, pow2
from .dyadic import Dyadic, dy_from_fraction, parse_decimal
from .elementary import ComplexBall, ComplexDyadic
from .errors import DomainError, ResourceError

DEFAULT_TERM_CAP = 200_000
# direct alternating sums are used up to this many terms
_DIRECT_ETA_LIMIT = 20_000


@dataclass(frozen=True)
class OracleResult:
    value: Union[Dyadic, ComplexDyadic]
    radius_exp: int
    method: str

    @property
    def radius(self) -> Fraction:
        return pow2(self.radius_exp)

    def ball(self):
        if isinstance(self.value, ComplexDyadic):
            return ComplexBall(self.value, self.radius_exp)
        return Ball(self.value, self.radius_exp)


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Dyadic):
        return x.to_fraction()
    if isinstance(x, str):
        return parse_decimal(x)
    return Fraction(x)


@contextmanager
def _ivprec(bits: int):
    saved = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = saved


def _iv_exact(x: Fraction):
    return iv.mpf(x.numerator) / x.denominator


def _bounds(x) -> tuple[Fraction, Fraction]:
    a, b = x._mpi_
    res = []
    for t in (a, b):
        if t in (finf, fninf, fnan):
            raise ResourceError("interval evaluation overflowed")
        sign, man, exp, _ = t
        v = Fraction(man << exp) if exp >= 0 else Fraction(man, 1 << -exp)
        res.append(-v if sign else v)
    return res[0], res[1]


def _real_result(x, n: int, method: str) -> OracleResult:
    lo, hi = _bounds(x)
    c = dy_from_fraction((lo + hi) / 2, n + 4)
    cf = c.to_fraction()
    r = max(hi - cf, cf - lo)
    return OracleResult(c, ceil_log2_frac(r) if r > 0 else -(n + 4), method)


def _complex_result(z, n: int, method: str) -> OracleResult:
    parts = []
    rad = Fraction(0)
    for comp in (z.real, z.imag):
        lo, hi = _bounds(comp)
        c = dy_from_fraction((lo + hi) / 2, n + 4)
        cf = c.to_fraction()
        rad += max(hi - cf, cf - lo)
        parts.append(c)
    return OracleResult(ComplexDyadic(*parts), ceil_log2_frac(rad) if rad > 0 else -(n + 4), method)


def oracle_binom_exact(k: int, q: int, cap: int = 1 << 20) -> int:
    """C(k, q) by the multiplicative formula."""
    if not 0 <= q <= k:
        raise ValueError("need 0 <= q <= k")
    if k > cap:
        raise ResourceError(f"k = {k} exceeds cap {cap}")
    c = 1
    for i in range(min(q, k - q)):
        c = c * (k - i) // (i + 1)
    return c


# ---------------------------------------------------------------------------
# Euler-Maclaurin
#
# zeta(s) = sum_{k<N} k^-s + N^(1-s)/(s-1) + N^-s/2
#           + sum_{j<=P} B_2j/(2j)! (s)_(2j-1) N^(1-s-2j) + R,
# |R| <= |B_2P|/(2P)! |(s)_2P| N^(1-sigma-2P) / (sigma + 2P - 1).


def _em_parameters(bits: int, sigma: float, s_abs: float, cap: int) -> tuple[int, int]:
    best = None
    for P in range(1, 4 * bits + 8):
        # log2 of 4 (2 pi)^-2P (|s|)_2P / (sigma + 2P - 1), without the N factor
        rising = math.lgamma(s_abs + 2 * P) - math.lgamma(s_abs) if s_abs > 0 else 0.0
        c = 2 - 2 * P * math.log2(2 * math.pi) + rising / math.log(2) - math.log2(sigma + 2 * P - 1)
        e = 2 * P + sigma - 1
        need = (bits + 4 + c) / e
        N = max(2, math.ceil(2 ** max(need, 1)), math.ceil(s_abs) + 1)
        cost = N + 4 * P
        if best is None or cost < best[0]:
            best = (cost, N, P)
        elif N < 4 and cost > 2 * best[0]:
            break
    _, N, P = best
    if N > cap:
        raise ResourceError(f"Euler-Maclaurin needs {N} terms, cap is {cap}")
    return N, P


def _em_zeta(s, sigma: Fraction, s_abs: float, bits: int, cap: int, direct: int = 0):
    """Interval enclosure of zeta(s) with truncation error <= 2**-bits."""
    N, P = _em_parameters(bits, float(sigma), s_abs, cap)
    N = max(N, direct)
    while True:
        total = 0
        for k in range(1, N):
            total += iv.exp(-s * iv.log(k))
        lnN = iv.log(N)
        Ns = iv.exp(-s * lnN)
        total += N * Ns / (s - 1) + Ns / 2
        rising = s
        invN2 = iv.mpf(1) / (N * N)
        pw = Ns * N * invN2
        for j in range(1, P + 1):
            b = mpmath.bernfrac(2 * j)
            coef = Fraction(int(b[0]), int(b[1])) / math.factorial(2 * j)
            total += _iv_exact(coef) * rising * pw
            rising = rising * (s + 2 * j - 1) * (s + 2 * j)
            pw = pw * invN2
        # rising is now (s)_(2P+1); divide out the last factor for (s)_2P
        rising_2p = rising / (s + 2 * P)
        b = mpmath.bernfrac(2 * P)
        bcoef = abs(Fraction(int(b[0]), int(b[1]))) / math.factorial(2 * P)
        mod = abs(rising_2p) if isinstance(rising_2p, iv.mpf) else iv.sqrt(rising_2p.real**2 + rising_2p.imag**2)
        sig = _iv_exact(sigma)
        R = _iv_exact(bcoef) * mod * iv.exp((1 - sig - 2 * P) * lnN) / (sig + 2 * P - 1)
        r_hi = _bounds(R)[1]
        if r_hi <= pow2(-bits):
            return total, r_hi
        N *= 2
        if N > cap:
            raise ResourceError(f"Euler-Maclaurin remainder did not reach 2**-{bits} within {cap} terms")


def oracle_zeta_dirichlet(s, n: int, cap: int = DEFAULT_TERM_CAP) -> OracleResult:
    """zeta(s), real s >= 1 + 2**-8, to 2**-n: direct sum plus an enclosed tail."""
    sf = _to_fraction(s)
    if sf < 1 + pow2(-8):
        raise DomainError("the Dirichlet oracle needs s >= 1 + 2**-8")
    bits = n + 2
    with _ivprec(n + 48):
        si = _iv_exact(sf)
        total, r = _em_zeta(si, sf, float(sf), bits, cap, direct=16)
        total += iv.mpf([-1, 1]) * _iv_exact(r)
        return _real_result(total, n, "dirichlet")


def oracle_zeta_euler_maclaurin(sigma, t, n: int, cap: int = DEFAULT_TERM_CAP) -> OracleResult:
    """zeta(sigma + i t) for sigma > 0, s != 1, to 2**-n."""
    sf, tf = _to_fraction(sigma), _to_fraction(t)
    if sf <= 0:
        raise DomainError("the Euler-Maclaurin oracle needs sigma > 0")
    if sf == 1 and tf == 0:
        raise DomainError("s = 1 is the pole of zeta")
    bits = n + 2
    s_abs = math.hypot(float(sf), float(tf))
    # cancellation in the N^(1-s)/(s-1) terms costs roughly |t| bits
    with _ivprec(n + 64 + int(2 * abs(float(tf)))):
        s = iv.mpc(_iv_exact(sf), _iv_exact(tf))
        total, r = _em_zeta(s, sf, s_abs, bits, cap)
        e = _iv_exact(r) * iv.mpf([-1, 1])
        total = iv.mpc(total.real + e, total.imag + e)
        return _complex_result(total, n, "euler-maclaurin")


# ---------------------------------------------------------------------------
# alternating eta


def _shifted_chebyshev_quotient(N: int) -> tuple[list[int], int]:
    """Coefficients r_k and d = T_N(3) with sum r_k a_k / d ~ sum (-1)^k a_k.

    P(x) = T_N(1 - 2x) has integer coefficients and |P| <= 1 on [0, 1];
    (P(-1) - P(x)) / (1 + x) = sum r_k x^k.
    """
    prev, cur = [1], [1, -2]
    if N == 0:
        cur = prev
    for _ in range(N - 1):
        nxt = [0] * (len(cur) + 1)
        for i, c in enumerate(cur):
            nxt[i] += 2 * c
            nxt[i + 1] += -4 * c
        for i, c in enumerate(prev):
            nxt[i] -= c
        prev, cur = cur, nxt
    d = sum(c * (-1) ** i for i, c in enumerate(cur))
    # synthetic division: P(x) - d = (x + 1) Q(x)
    deg = len(cur) - 1
    q = [0] * deg
    carry = 0
    for i in range(deg, 0, -1):
        q[i - 1] = cur[i] - carry
        carry = q[i - 1]
    return [-c for c in q], d


def oracle_eta_alternating(s, n: int, cap: int = DEFAULT_TERM_CAP) -> OracleResult:
    """eta(s) = sum (-1)**(k+1) k**-s for real s >= 2**-8, to 2**-n."""
    sf = _to_fraction(s)
    if sf < pow2(-8):
        raise DomainError("the alternating oracle needs s >= 2**-8")
    bits = n + 2
    # first omitted term (K+1)^-s <= 2^-bits
    log2K = bits / float(sf)
    if log2K < math.log2(_DIRECT_ETA_LIMIT):
        K = math.ceil(2**log2K)
        with _ivprec(n + 32 + K.bit_length()):
            si = _iv_exact(sf)
            total = 0
            for k in range(1, K + 1):
                term = iv.exp(-si * iv.log(k))
                total = total + term if k & 1 else total - term
            nxt = iv.exp(-si * iv.log(K + 1))
            other = total + nxt if (K + 1) & 1 else total - nxt
            lo = min(_bounds(total)[0], _bounds(other)[0])
            hi = max(_bounds(total)[1], _bounds(other)[1])
            return _real_result(_iv_hull(lo, hi), n, "alternating")
    # |eta - S_N| <= eta / T_N(3) <= 1 / T_N(3), T_N(3) >= (3 + sqrt 8)^N / 2
    N = math.ceil((bits + 1) / math.log2(3 + math.sqrt(8))) + 1
    if N > cap:
        raise ResourceError(f"alternating oracle needs {N} terms, cap is {cap}")
    r, d = _shifted_chebyshev_quotient(N)
    with _ivprec(n + 2 * d.bit_length() + 48):
        si = _iv_exact(sf)
        total = 0
        for k, c in enumerate(r):
            total += c * iv.exp(-si * iv.log(k + 1))
        total = total / d
        total += iv.mpf([-1, 1]) / d
        return _real_result(total, n, "alternating-accelerated")


def _iv_hull(lo: Fraction, hi: Fraction):
    a = _iv_exact(lo)
    b = _iv_exact(hi)
    return iv.mpf([a.a, b.b])


__all__ = [
    "OracleResult",
    "oracle_binom_exact",
    "oracle_eta_alternating",
    "oracle_zeta_dirichlet",
    "oracle_zeta_euler_maclaurin",
]
