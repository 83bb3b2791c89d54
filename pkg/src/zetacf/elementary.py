"""Certified exp, log1p, (1+x)**h, sin and cos, real and complex.

The kernels work on fixed-point integers: a pair ``(M, E)`` at scale ``w``
means the true value lies within ``E / 2**w`` of ``M / 2**w``. Every error
term is tracked as an integer, so the bounds are exact rather than
estimated. The public operations take :class:`ApproxReal` inputs, pick the
input precision from a linear schedule, run a kernel and certify the
result with the propagated input error before returning.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Optional

from gmpy2 import mpz

from .approx import (
    ApproxReal,
    Ball,
    EvalContext,
    as_real,
    ceil_log2_frac,
    pow2,
)
from .dyadic import Dyadic, dy_from_fraction, dy_round
from .errors import ContractError, DomainError

# ---------------------------------------------------------------------------
# complex carriers


@dataclass(frozen=True)
class ComplexDyadic:
    re: Dyadic
    im: Dyadic

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    def conjugate(self) -> ComplexDyadic:
        return ComplexDyadic(self.re, -self.im)

    def __add__(self, other: ComplexDyadic) -> ComplexDyadic:
        return ComplexDyadic(self.re + other.re, self.im + other.im)

    def __sub__(self, other: ComplexDyadic) -> ComplexDyadic:
        return ComplexDyadic(self.re - other.re, self.im - other.im)

    def __mul__(self, other: ComplexDyadic) -> ComplexDyadic:
        a, b, c, d = self.re, self.im, other.re, other.im
        return ComplexDyadic(a * c - b * d, a * d + b * c)

    def abs2(self) -> Fraction:
        return self.re.to_fraction() ** 2 + self.im.to_fraction() ** 2


def cdy_round(z: ComplexDyadic, n: int) -> ComplexDyadic:
    return ComplexDyadic(dy_round(z.re, n), dy_round(z.im, n))


@dataclass(frozen=True)
class ComplexBall:
    """Disk ``|x - center| <= 2**radius_exp`` in the complex modulus."""

    center: ComplexDyadic
    radius_exp: Optional[int] = None

    @property
    def radius(self) -> Fraction:
        return Fraction(0) if self.radius_exp is None else pow2(self.radius_exp)

    @classmethod
    def from_error(cls, center: ComplexDyadic, err: Fraction) -> ComplexBall:
        return cls(center, None if err == 0 else ceil_log2_frac(Fraction(err)))

    def contains(self, re, im) -> bool:
        dr = Fraction(re) - self.center.re.to_fraction()
        di = Fraction(im) - self.center.im.to_fraction()
        return dr * dr + di * di <= self.radius**2

    def intersects(self, other: ComplexBall) -> bool:
        d2 = (self.center - other.center).abs2()
        r = self.radius + other.radius
        return d2 <= r * r

    def within(self, n: int) -> bool:
        return self.radius_exp is None or self.radius_exp <= -n

    def conjugate(self) -> ComplexBall:
        return ComplexBall(self.center.conjugate(), self.radius_exp)

    def abs_upper(self) -> Fraction:
        """Upper bound on ``|x|`` over the disk."""
        return _sqrt_upper(self.center.abs2()) + self.radius

    def abs_lower(self) -> Fraction:
        return _sqrt_lower(self.center.abs2()) - self.radius


def _sqrt_upper(x: Fraction, bits: int = 64) -> Fraction:
    """Dyadic upper bound of ``sqrt(x)`` for ``x >= 0``."""
    scale = 2 * bits
    r = isqrt(x.numerator * 4**scale // x.denominator) + 1
    return Fraction(r, 2**scale)


def _sqrt_lower(x: Fraction, bits: int = 64) -> Fraction:
    scale = 2 * bits
    r = isqrt(x.numerator * 4**scale // x.denominator)
    return Fraction(r, 2**scale)


# ---------------------------------------------------------------------------
# fixed-point helpers


def _fx(d: Dyadic):
    """Split a dyadic into ``(X, w)`` with value ``X / 2**w`` and ``w >= 0``."""
    if d.exponent >= 0:
        return mpz(d.mantissa) << d.exponent, 0
    return mpz(d.mantissa), -d.exponent


def _ceil_shift(e: int, d: int) -> int:
    """``ceil(e / 2**d)`` for ``e >= 0``."""
    if d <= 0:
        return e << -d
    return -((-e) >> d)


def _rescale(m, e, w_from: int, w_to: int):
    """Move ``(m, e)`` from scale ``w_from`` to ``w_to`` keeping the bound sound."""
    d = w_from - w_to
    if d <= 0:
        return m << -d, e << -d
    return m >> d, _ceil_shift(e, d) + 1


def _atanh_inv(d: int, w: int):
    """``atanh(1/d)`` at scale ``w`` for integer ``d >= 3``; error bound in ulps."""
    pw = (mpz(1) << w) // d
    d2 = d * d
    acc = mpz(0)
    j = 0
    while pw:
        # floor(floor(a/b)/c) == floor(a/(bc)): each term is off by < 1 ulp
        acc += pw // (2 * j + 1)
        j += 1
        pw //= d2
    return acc, j + 2


def _atan_inv(d: int, w: int):
    """``atan(1/d)`` at scale ``w`` for integer ``d >= 2``."""
    pw = (mpz(1) << w) // d
    d2 = d * d
    acc = mpz(0)
    j = 0
    while pw:
        t = pw // (2 * j + 1)
        acc += -t if j & 1 else t
        j += 1
        pw //= d2
    return acc, j + 1


# ---------------------------------------------------------------------------
# certified constants, cached per process at the highest precision seen


class _ConstantCache:
    """Grow-only table of fixed-point constants guarded by a lock."""

    def __init__(self, compute):
        self._compute = compute
        self._lock = threading.Lock()
        self._w = -1
        self._m = mpz(0)
        self._e = 0

    def get(self, w: int):
        with self._lock:
            if self._w < w + 8:
                wc = max(w + 16, 2 * self._w)
                self._m, self._e = self._compute(wc)
                self._w = wc
            return _rescale(self._m, self._e, self._w, w)


def _ln2_compute(w):
    g = 8 + w.bit_length()
    a, e = _atanh_inv(3, w + g)
    return _rescale(2 * a, 2 * e, w + g, w)


def _pi_compute(w):
    g = 8 + w.bit_length()
    a, ea = _atan_inv(5, w + g)
    b, eb = _atan_inv(239, w + g)
    return _rescale(16 * a - 4 * b, 16 * ea + 4 * eb, w + g, w)


_LN2 = _ConstantCache(_ln2_compute)
_PI = _ConstantCache(_pi_compute)


def ln2_fixed(w: int):
    """``(M, E)`` with ``|M / 2**w - ln 2| <= E / 2**w``."""
    return _LN2.get(w)


def pi_fixed(w: int):
    return _PI.get(w)


def ln2_ball(n: int) -> Ball:
    m, e = ln2_fixed(n + 2)
    return Ball.from_error(Dyadic(int(m), -(n + 2)), Fraction(int(e), 2 ** (n + 2)))


def pi_ball(n: int) -> Ball:
    m, e = pi_fixed(n + 2)
    return Ball.from_error(Dyadic(int(m), -(n + 2)), Fraction(int(e), 2 ** (n + 2)))


# ---------------------------------------------------------------------------
# kernels on exact fixed-point inputs


def exp_fixed(x, wi: int, wo: int):
    """``exp(x / 2**wi)`` at scale ``wo``; returns ``(M, E)``."""
    x = mpz(x)
    if x == 0:
        return mpz(1) << wo, 0
    # k ~ x / ln2 from a 64-bit ln2; any k with |r| < 0.4 will do
    l64, _ = ln2_fixed(64)
    k = int(((x << 65) // (l64 << wi) + 1) >> 1)
    guard = 10 + 2 * (wo + abs(k)).bit_length()
    wt = wo + max(k, 0) + guard
    j = max(2, isqrt(wt) // 2)
    guard += j
    wt += j
    kb = abs(k).bit_length() + 2
    lm, le = ln2_fixed(wt + kb)
    if wi <= wt:
        r = x << (wt - wi)
        er = 0
    else:
        r = x >> (wi - wt)
        er = 1
    r -= (k * lm) >> kb
    er += _ceil_shift(abs(k) * le, kb) + 1
    # r is at scale wt; reinterpret at scale ws = wt + j to divide by 2**j
    ws = wt + j
    one = mpz(1) << ws
    neg = r < 0
    ar = -r if neg else r
    s = one
    t = one
    i = 0
    while t:
        i += 1
        t = (t * ar >> ws) // i
        s += -t if (neg and i & 1) else t
    e = 2 * i + 4 + 2 * er
    for _ in range(j):
        e = ((2 * s * e + e * e) >> ws) + 2
        s = s * s >> ws
    return _rescale(s, e, ws - k, wo)


def expi_fixed(x, wi: int, wo: int):
    """``(cos, sin)`` of ``x / 2**wi`` at scale ``wo``; returns ``(C, S, E)``.

    ``E`` bounds the error of each component separately.
    """
    x = mpz(x)
    if x == 0:
        return mpz(1) << wo, mpz(0), 0
    p64, _ = pi_fixed(64)
    # quadrant count k ~ x / (pi/2)
    k = int(((x << 66) // (p64 << wi) + 1) >> 1)
    guard = 12 + 2 * (wo + abs(k)).bit_length()
    wt = wo + guard
    j = max(2, isqrt(wt) // 2)
    # each complex squaring can grow the componentwise bound by 2*sqrt(2)
    guard += 2 * j
    wt += 2 * j
    kb = abs(k).bit_length() + 3
    pm, pe = pi_fixed(wt + kb)
    if wi <= wt:
        r = x << (wt - wi)
        er = 0
    else:
        r = x >> (wi - wt)
        er = 1
    r -= (k * pm) >> (kb + 1)
    er += _ceil_shift(abs(k) * pe, kb + 1) + 1
    ws = wt + j
    one = mpz(1) << ws
    neg = r < 0
    ar = -r if neg else r
    c = one
    s = mpz(0)
    t = one
    i = 0
    while t:
        i += 1
        t = (t * ar >> ws) // i
        q = i & 3
        if q == 0:
            c += t
        elif q == 2:
            c -= t
        elif (q == 1) != neg:
            s += t
        else:
            s -= t
    e = 2 * i + 4 + er
    for _ in range(j):
        e = ((2 * (abs(c) + abs(s)) * e + 2 * e * e) >> ws) + 2
        c, s = (c * c - s * s) >> ws, (c * s) >> (ws - 1)
    q = k & 3
    if q == 1:
        c, s = -s, c
    elif q == 2:
        c, s = -c, -s
    elif q == 3:
        c, s = s, -c
    c, e1 = _rescale(c, e, ws, wo)
    s, _ = _rescale(s, e, ws, wo)
    return c, s, e1


def log_fixed(x, wi: int, wo: int):
    """``ln(x / 2**wi)`` at scale ``wo`` for ``x > 0``; returns ``(M, E)``."""
    x = mpz(x)
    if x <= 0:
        raise DomainError("logarithm of a nonpositive number")
    bl = x.bit_length()
    # y = x / 2**(wi + j) in [3/4, 3/2)
    jj = bl - 1 if 2 * x < 3 * (mpz(1) << (bl - 1)) else bl
    j = jj - wi
    guard = 8 + 2 * wo.bit_length()
    wt = wo + guard
    if jj >= 0:
        d = mpz(1) << jj
        xx = x
    else:
        d = mpz(1)
        xx = x << -jj
    z = ((xx - d) << wt) // (xx + d)
    neg = z < 0
    az = -z if neg else z
    z2 = az * az >> wt
    acc = mpz(0)
    p = az
    i = 0
    while p:
        acc += p // (2 * i + 1)
        i += 1
        p = p * z2 >> wt
    if neg:
        acc = -acc
    e = 2 * (3 * i + 5)
    acc *= 2
    if j:
        kb = abs(j).bit_length() + 2
        lm, le = ln2_fixed(wt + kb)
        acc += (j * lm) >> kb
        e += _ceil_shift(abs(j) * le, kb) + 1
    return _rescale(acc, e, wt, wo)


# ---------------------------------------------------------------------------
# certification driver


def _certify(ctx: EvalContext, n: int, name: str, attempt):
    """Run ``attempt(boost)`` -> (center, err) until err <= 2**-n; retry once."""
    for boost in (0, n + 16):
        center, err = attempt(boost)
        if err <= pow2(-n):
            return center, err
        ctx.violation(f"{name}: radius above 2**-{n} (boost {boost})")
    raise ContractError(f"{name} could not certify 2**-{n}")


def _frac(m, w: int) -> Fraction:
    return Fraction(int(m), 1 << w) if w >= 0 else Fraction(int(m) << -w)


def _mag_check(d: Dyadic, p: int, m: int, what: str):
    if abs(d.to_fraction()) > pow2(p) + pow2(-m):
        raise ContractError(f"{what} = {float(d):.6g} violates |.| <= 2**{p}")


# ---------------------------------------------------------------------------
# real operations


def _exp_ball(xm: Dyadic, eps: Fraction, w: int):
    """Center and error of ``exp`` over the ball ``xm +- eps`` at scale ``w``."""
    X, wi = _fx(xm)
    M, E = exp_fixed(X, wi, w)
    upper = _frac(M + E, w)
    # e^(y+d) - e^y <= e^y * 2|d| for |d| <= 1
    return Dyadic(int(M), -w), _frac(E, w) + 2 * upper * eps


def exp_real_ball(x, n: int, p: int, ctx: Optional[EvalContext] = None) -> Ball:
    x = as_real(x)
    ctx = ctx or EvalContext()

    def attempt(boost):
        # e^x <= 2^(1.45 * 2^p): relative bits needed grow with 2^p
        m = ctx.need_precision(n + 2 ** (p + 1) + 3 + boost)
        xm = x.query(m, ctx)
        _mag_check(xm, p, m, "exp argument")
        return _exp_ball(xm, pow2(-m), n + 3 + boost)

    return Ball.from_error(*_certify(ctx, n, "exp_real", attempt))


def exp_real(x, n: int, p: int, ctx: Optional[EvalContext] = None) -> Dyadic:
    return exp_real_ball(x, n, p, ctx).center


def _log1p_ball(xm: Dyadic, eps: Fraction, p: int, w: int):
    y = xm + 1
    yf = y.to_fraction()
    if yf - eps <= 0 or yf + eps < pow2(-p):
        raise DomainError(f"1 + x = {float(y):.6g} is not certifiably >= 2**-{p}")
    Y, wi = _fx(y)
    M, E = log_fixed(Y, wi, w)
    return Dyadic(int(M), -w), _frac(E, w) + eps / (yf - eps)


def log1p_real_ball(x, n: int, p: int, ctx: Optional[EvalContext] = None) -> Ball:
    x = as_real(x)
    ctx = ctx or EvalContext()

    def attempt(boost):
        m = ctx.need_precision(n + p + 3 + boost)
        xm = x.query(m, ctx)
        return _log1p_ball(xm, pow2(-m), p, n + 3 + boost)

    return Ball.from_error(*_certify(ctx, n, "log1p_real", attempt))


def log1p_real(x, n: int, p: int, ctx: Optional[EvalContext] = None) -> Dyadic:
    return log1p_real_ball(x, n, p, ctx).center


def _bits(v: int) -> int:
    """``ceil(log2(v))`` for integer ``v >= 1``."""
    return max(0, (v - 1).bit_length())


def pow1p_precision(n: int, p1: int, p2: int) -> int:
    """Input precision for ``(1+x)**h``: linear in ``n`` for fixed ``(p1, p2)``.

    The result can be as large as ``2**(p1*p2)``, hence the product term.
    """
    return n + p1 * p2 + _bits(p1) + _bits(p2) + 8


def pow1p_real_ball(x, h, n: int, p1: int, p2: int, ctx: Optional[EvalContext] = None) -> Ball:
    x, h = as_real(x), as_real(h)
    ctx = ctx or EvalContext()
    if x.exact is not None and h.exact is not None and h.exact.is_integer():
        base = (x.exact + 1).to_fraction()
        k = h.exact.to_fraction().numerator
        if base <= 0:
            raise DomainError("1 + x must be positive")
        val = base**k
        center = dy_from_fraction(val, n + 1)
        return Ball.from_error(center, abs(val - center.to_fraction()))

    def attempt(boost):
        m = ctx.need_precision(pow1p_precision(n, p1, p2) + boost)
        xm, hm = x.query(m + p1 + 2, ctx), h.query(m, ctx)
        if abs(hm.to_fraction()) >= p2 + pow2(-m):
            raise ContractError(f"exponent {float(hm):.6g} violates |h| < {p2}")
        w = m + 2
        lc, lerr = _log1p_ball(xm, pow2(-(m + p1 + 2)), p1, w)
        eh = pow2(-m)
        y = dy_round(hm * lc, w)
        yerr = (
            abs(hm.to_fraction()) * lerr
            + abs(lc.to_fraction()) * eh
            + lerr * eh
            + abs((hm * lc - y).to_fraction())
        )
        if yerr > 1:
            return y, Fraction(2**64)
        return _exp_ball(y, yerr, n + 3 + boost)

    return Ball.from_error(*_certify(ctx, n, "pow1p_real", attempt))


def pow1p_real(x, h, n: int, p1: int, p2: int, ctx: Optional[EvalContext] = None) -> Dyadic:
    return pow1p_real_ball(x, h, n, p1, p2, ctx).center


def _expi_ball(ym: Dyadic, eps: Fraction, w: int):
    Y, wi = _fx(ym)
    C, S, E = expi_fixed(Y, wi, w)
    err = _frac(E, w) + eps
    return Dyadic(int(C), -w), Dyadic(int(S), -w), err


def _trig_ball(y, n, p, ctx, which):
    y = as_real(y)
    ctx = ctx or EvalContext()

    def attempt(boost):
        m = ctx.need_precision(n + 3 + boost)
        ym = y.query(m, ctx)
        _mag_check(ym, p, m, "angle")
        c, s, err = _expi_ball(ym, pow2(-m), n + 4 + boost)
        return (c if which == "cos" else s), err

    return Ball.from_error(*_certify(ctx, n, which, attempt))


def sin_real_ball(y, n: int, p: int, ctx: Optional[EvalContext] = None) -> Ball:
    return _trig_ball(y, n, p, ctx, "sin")


def cos_real_ball(y, n: int, p: int, ctx: Optional[EvalContext] = None) -> Ball:
    return _trig_ball(y, n, p, ctx, "cos")


def sin_real(y, n: int, p: int, ctx: Optional[EvalContext] = None) -> Dyadic:
    return sin_real_ball(y, n, p, ctx).center


def cos_real(y, n: int, p: int, ctx: Optional[EvalContext] = None) -> Dyadic:
    return cos_real_ball(y, n, p, ctx).center


# ---------------------------------------------------------------------------
# complex operations


def _cexp_ball(xm: Dyadic, ex: Fraction, ym: Dyadic, ey: Fraction, w: int):
    """``exp(x + iy)`` over the input balls; error in the complex modulus."""
    X, xi = _fx(xm)
    Y, yi = _fx(ym)
    M, E = exp_fixed(X, xi, w)
    C, S, Ec = expi_fixed(Y, yi, w)
    re = M * C >> w
    im = M * S >> w
    # |a'z' - az| <= |a'||z'-z| + |z||a'-a|, |z| = 1, componentwise -> modulus: *2
    upper = _frac(M + E, w)
    err = upper * 2 * _frac(Ec, w) + _frac(E, w) + 2 * _frac(1, w)
    # input errors: d/dx = e^x, d/dy has modulus e^x
    err += upper * (2 * ex + ey) * 2
    return ComplexDyadic(Dyadic(int(re), -w), Dyadic(int(im), -w)), err


def exp_complex_ball(z, n: int, p: int, ctx: Optional[EvalContext] = None) -> ComplexBall:
    x, y = (as_real(v) for v in z)
    ctx = ctx or EvalContext()

    def attempt(boost):
        m = ctx.need_precision(n + 2 ** (p + 1) + 4 + boost)
        xm, ym = x.query(m, ctx), y.query(m, ctx)
        _mag_check(xm, p, m, "re z")
        _mag_check(ym, p, m, "im z")
        eps = pow2(-m)
        return _cexp_ball(xm, eps, ym, eps, m + 2)

    return ComplexBall.from_error(*_certify(ctx, n, "exp_complex", attempt))


def exp_complex(z, n: int, p: int, ctx: Optional[EvalContext] = None) -> ComplexDyadic:
    return exp_complex_ball(z, n, p, ctx).center


def pow1p_complex_ball(x, s, n: int, p: int, ctx: Optional[EvalContext] = None) -> ComplexBall:
    """``(1+x)**s = exp(s * log1p(x))`` for real ``x`` and complex ``s = (sigma, t)``."""
    x = as_real(x)
    sig, t = (as_real(v) for v in s)
    ctx = ctx or EvalContext()

    def attempt(boost):
        # |s log(1+x)| < p * 2**p bounds both the modulus and the angle
        m = ctx.need_precision(n + p * 2**p + p + 2 * _bits(p + 1) + 8 + boost)
        xm = x.query(m + p + 2, ctx)
        sm, tm = sig.query(m, ctx), t.query(m, ctx)
        _mag_check(sm, p, m, "sigma")
        _mag_check(tm, p, m, "t")
        w = m + 2
        lc, lerr = _log1p_ball(xm, pow2(-(m + p + 2)), p, w)
        es = pow2(-m)
        a = dy_round(sm * lc, w)
        b = dy_round(tm * lc, w)
        lf = abs(lc.to_fraction())
        ea = abs(sm.to_fraction()) * lerr + lf * es + lerr * es + abs((sm * lc - a).to_fraction())
        eb = abs(tm.to_fraction()) * lerr + lf * es + lerr * es + abs((tm * lc - b).to_fraction())
        if ea > 1 or eb > 1:
            return ComplexDyadic(a, b), Fraction(2**64)
        return _cexp_ball(a, ea, b, eb, n + 4 + boost + p * 2**p)

    return ComplexBall.from_error(*_certify(ctx, n, "pow1p_complex", attempt))


def pow1p_complex(x, s, n: int, p: int, ctx: Optional[EvalContext] = None) -> ComplexDyadic:
    return pow1p_complex_ball(x, s, n, p, ctx).center


__all__ = [
    "ComplexBall",
    "ComplexDyadic",
    "cdy_round",
    "cos_real",
    "cos_real_ball",
    "exp_complex",
    "exp_complex_ball",
    "exp_fixed",
    "exp_real",
    "exp_real_ball",
    "expi_fixed",
    "ln2_ball",
    "ln2_fixed",
    "log1p_real",
    "log1p_real_ball",
    "log_fixed",
    "pi_ball",
    "pi_fixed",
    "pow1p_complex",
    "pow1p_complex_ball",
    "pow1p_precision",
    "pow1p_real",
    "pow1p_real_ball",
    "sin_real",
    "sin_real_ball",
]
