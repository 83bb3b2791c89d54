"""Real zeta(s), s > 1, from the globally convergent binomial series.

    zeta(s) = v(s) * u(s),
    v(s) = 1 / (1 - 2**(1-s)),
    u(s) = sum_k 2**-(k+1) * h(k, s),
    h(k, s) = sum_{q<=k} (-1)**q * C(k, q) * (q+1)**-s.

Precision flows top-down through a :class:`PrecisionPlan`: the product
needs ``n1`` bits of ``v`` and ``u``, the truncated series ``n2 = n1 + 1``,
each ``h`` term ``n3 = n2 + 1`` and the inner products ``n4(k)`` bits,
growing with ``k`` to absorb the binomial cancellation. The series stops at
``iota = 4p + 2*n2 + C6``.

Summation streams: one accumulator per level, no stored terms, so the live
state is O(n) bits. The same loops serve complex ``s``; see
:mod:`zetacf.zeta_complex`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from gmpy2 import mpz

from .approx import (
    ApproxReal,
    Ball,
    ConstReal,
    EvalContext,
    FnReal,
    as_real,
    ceil_log2_frac,
    inv_to_prec,
    inv_to_prec_ball,
    metered,
    mul_to_prec_ball,
    pow2,
)
from .dyadic import ONE, Dyadic
from .elementary import (
    _atanh_inv,
    _bits,
    _ceil_shift,
    exp_fixed,
    expi_fixed,
    ln2_fixed,
    log_fixed,
    pow1p_real,
)
from .errors import DomainError

# Constants left symbolic in the derivation, fixed here.
# C1: u(s) = eta(s) lies in (1/2, 1] for real s > 1.
C1 = 1
# C3, C4: (k+1)(2^k + 2) 2^-n4 <= 2^(k + ceil(log2(k+2)) + 2 - n4); one spare bit.
C3 = 1
C4 = 3
# C5, C6: 0 <= h(k, s) <= 1 for real s > 0, so the tail after iota is <= 2^-(iota+1).
C5 = 2
C6 = 8


def c2(p: int) -> int:
    """Extra bits for the product: |v| < 2**(2p), |u| <= C1 = 1."""
    return 2 * p + 2


@dataclass(frozen=True)
class PrecisionPlan:
    """Resolved precision cascade for one evaluation at target ``2**-n``."""

    n: int
    p: int
    n1: int
    n2: int
    n3: int
    iota: int
    m: int
    constants: dict = field(default_factory=dict, compare=False)
    n4_extra: int = 0

    def n4(self, k: int) -> int:
        return self.n3 + C3 * k + _bits(k + 2) + C4 + self.n4_extra

    @property
    def u_scale(self) -> int:
        """Fixed-point scale of the u accumulator."""
        return self.n2 + 2 + _bits(self.iota + 2)


def plan_from_n1(n1: int, p: int, n: Optional[int] = None, extra_iota: int = 0, n4_extra: int = 0) -> PrecisionPlan:
    n2 = n1 + 1
    n3 = n2 + 1
    iota = 4 * p + 2 * n2 + C6 + extra_iota
    n4_max = n3 + C3 * iota + _bits(iota + 2) + C4 + n4_extra
    m = max(n4_max + _bits(iota + 2) + 4, n1 + 2 ** (p + 1) + 2 * p + 16)
    return PrecisionPlan(
        n=n1 - c2(p) if n is None else n,
        p=p,
        n1=n1,
        n2=n2,
        n3=n3,
        iota=iota,
        m=m,
        constants={"C1": C1, "C2": c2(p), "C3": C3, "C4": C4, "C5": C5, "C6": C6},
        n4_extra=n4_extra,
    )


def make_plan(n: int, p: int) -> PrecisionPlan:
    if n < 0 or p < 1:
        raise ValueError("need n >= 0 and p >= 1")
    return plan_from_n1(n + c2(p), p, n)


def lambda_upper(p: int) -> Fraction:
    """Certified upper bound of log2(1 + 2**-p)."""
    w = p + 48
    lm, le = log_fixed((mpz(1) << w) + (mpz(1) << (w - p)), w, w)
    l2, e2 = ln2_fixed(w)
    return Fraction(int(lm + le), int(l2 - e2))


def s_interval(s: ApproxReal, ctx: EvalContext, max_m: int = 4096):
    """Certified ``(lo, hi)`` of ``s`` tight enough to decide ``s > 1``."""
    known = s.exact.to_fraction() if s.exact is not None else getattr(s, "value", None)
    if known is not None:
        if known == 1:
            raise DomainError("s = 1 is the exceptional point s = 1, the pole of zeta")
        if known < 1:
            raise DomainError(f"s = {float(known):.6g} is outside the real-mode domain s > 1; "
                              "zeta has its pole at the exceptional point s = 1")
        return known, known
    m = 16
    while True:
        sm = s.query(m, ctx).to_fraction()
        eps = pow2(-m)
        if sm + eps <= 1:
            raise DomainError(f"s = {float(sm):.6g} is outside the real-mode domain s > 1; zeta has its pole at the exceptional point s = 1")
        if sm - eps > 1:
            return sm - eps, sm + eps
        if m >= max_m:
            raise DomainError("s cannot be separated from the exceptional point s = 1 (the pole of zeta)")
        m *= 2


def choose_p(lo: Fraction, hi: Fraction) -> int:
    """Smallest p >= 1 with [lo, hi] inside [1 + lambda(p), 2**p]."""
    p = max(1, ceil_log2_frac(hi))
    while lambda_upper(p) > lo - 1:
        p += 1
    return p


def plan(n: int, s, ctx: Optional[EvalContext] = None, p: Optional[int] = None) -> PrecisionPlan:
    s = as_real(s)
    ctx = ctx or EvalContext()
    lo, hi = s_interval(s, ctx)
    if p is None:
        p = choose_p(lo, hi)
    elif p < 1 or hi > pow2(p) or lambda_upper(p) > lo - 1:
        raise DomainError(f"s is not inside [1 + lambda({p}), 2**{p}]")
    return make_plan(n, p)


# ---------------------------------------------------------------------------
# binomial coefficients


@dataclass(frozen=True)
class SeriesTermState:
    """Snapshot of the omega loop after step ``tau``."""

    k: int
    q: int
    tau: int
    eps_ulps: int
    frac_bits: int
    partial: Dyadic

    @property
    def eps_exp(self) -> int:
        """Exponent ``e`` with certified error <= 2**e."""
        return _bits(self.eps_ulps) - self.frac_bits

    def satisfies_induction(self) -> bool:
        """eps_tau < 2**(-3q + 2 tau)."""
        return self.eps_ulps < pow2(self.frac_bits - 3 * self.q + 2 * self.tau)


def binom_recip(k: int, q: int, n_omega: int, trace: Optional[list] = None) -> Dyadic:
    """1 / C(k, q) within ``2**-n_omega`` as a truncated running product.

    omega = prod_{tau=1..q} (q - tau + 1) / (k - tau + 1), each partial
    product cut to ``F`` fractional bits. Starting from eps_1 = 2**-F the
    error at most quadruples per step, so ``F = n_omega + 2q + 2`` (and at
    least 3q) leaves eps_q below 2**-n_omega.
    """
    if not 0 <= q <= k:
        raise ValueError("need 0 <= q <= k")
    if q == 0:
        return ONE
    F = max(3 * q, n_omega + 2 * q + 2)
    w = (mpz(q) << F) // k
    e = 1
    if trace is not None:
        trace.append(SeriesTermState(k, q, 1, e, F, Dyadic(int(w), -F)))
    for tau in range(1, q):
        b = (mpz(q - tau) << F) // (k - tau)
        w = (w * b) >> F
        # omega* <= 1 and b <= 1: |b* - b| + |omega* - omega| + truncation
        e += 2
        if trace is not None:
            trace.append(SeriesTermState(k, q, tau + 1, e, F, Dyadic(int(w), -F)))
    return Dyadic(int(w), -F)


def binom_recip_real(k: int, q: int) -> ApproxReal:
    return FnReal(lambda m, ctx: binom_recip(k, q, m), hint=0, name=f"omega({k},{q})")


def g_eval(k: int, q: int, n4: int, ctx: Optional[EvalContext] = None) -> Dyadic:
    """C(k, q) within 2**-n4 by inverting omega, using omega >= 2**-k."""
    return inv_to_prec(binom_recip_real(k, q), n4, k, ctx)


# ---------------------------------------------------------------------------
# powers (q+1)**-s


def neg_real(x: ApproxReal) -> ApproxReal:
    if x.exact is not None:
        return ConstReal(-x.exact)
    return FnReal(lambda m, ctx: -x.query(m, ctx), x.hint, "neg")


def one_minus(x: ApproxReal) -> ApproxReal:
    if x.exact is not None:
        return ConstReal(ONE - x.exact)
    return FnReal(lambda m, ctx: ONE - x.query(m, ctx), None, "1-x")


def f_eval(q: int, s, n4: int, p: Optional[int] = None, ctx: Optional[EvalContext] = None) -> Dyadic:
    """(q+1)**-s within 2**-n4 through the generic (1+x)**h route."""
    s = as_real(s)
    if q < 0:
        raise ValueError("q must be nonnegative")
    if p is None:
        p = max(1, s.hint or 1)
    return pow1p_real(ConstReal(Dyadic(q)), neg_real(s), n4, (q + 2).bit_length(), 2**p + 1, ctx)


@dataclass
class Exponent:
    """The exponent s as seen by the inner loops: a queried dyadic plus its radius."""

    re: Dyadic
    im: Optional[Dyadic]
    eps: Fraction
    integer: Optional[int] = None

    @property
    def mag_bits(self) -> int:
        """b with |s| + eps <= 2**b."""
        mag = abs(self.re.to_fraction()) + self.eps
        if self.im is not None:
            mag += abs(self.im.to_fraction())
        return max(0, ceil_log2_frac(mag)) if mag else 0


def prepare_exponent(s_re: ApproxReal, s_im: Optional[ApproxReal], m: int, ctx: EvalContext) -> Exponent:
    ctx.need_precision(m)
    re = s_re.query(m, ctx)
    im = s_im.query(m, ctx) if s_im is not None else None
    exact = s_re.exact is not None and (s_im is None or s_im.exact is not None)
    integer = None
    if exact and s_re.exact.is_integer() and s_re.exact > 0 and (im is None or im.is_zero()):
        integer = s_re.exact.to_fraction().numerator
        im = None
    eps = Fraction(0) if exact else pow2(-m)
    return Exponent(re, im, eps, integer)


def _neg_exponent_product(ex: Exponent, L, WL: int):
    """(-Re(s) * L, -Im(s) * L) as fixed-point numbers at scale WL + frac."""
    res = []
    for part in (ex.re, ex.im):
        if part is None:
            res.append(None)
            continue
        pm, pe = part.mantissa, part.exponent
        if pe >= 0:
            res.append((-(mpz(pm) << pe) * L, WL))
        else:
            res.append((-mpz(pm) * L, WL - pe))
    return res


# ---------------------------------------------------------------------------
# h(k, s)


class HTerm:
    """Fixed-point value of h(k, s) at scale ``w``: ``re``, ``im`` and a
    componentwise error bound ``err`` in ulps."""

    __slots__ = ("re", "im", "err", "w", "live_bits")

    def __init__(self, re, im, err, w, live_bits):
        self.re, self.im, self.err, self.w, self.live_bits = re, im, err, w, live_bits


def _h_integer(k: int, W: int, s: int) -> HTerm:
    # (q+1)**-s is an exact rational: form C(k,q) * 2**W / (q+1)**s and cut once
    acc = mpz(0)
    c = mpz(1)
    for q in range(k + 1):
        t = (c << W) // ((q + 1) ** s)
        if q & 1:
            acc -= t
        else:
            acc += t
        c = c * (k - q) // (q + 1)
    live = acc.bit_length() + k + W + s * (k + 1).bit_length()
    return HTerm(acc, None, k + 1, W, live)


def _h_general(k: int, W: int, ex: Exponent, binomials: str, ctx: EvalContext) -> HTerm:
    # ln(q+1) = ln q + 2 atanh(1/(2q+1)), walked upward at scale WL
    WL = W + ex.mag_bits + _bits(k + 2) + _bits(W) + 8
    L = mpz(0)
    el = 0
    acc_re = mpz(0)
    acc_im = mpz(0) if ex.im is not None else None
    c = mpz(1)
    e_kernel = 0
    f_bits = 0
    for q in range(k + 1):
        if q:
            a, ea = _atanh_inv(2 * q + 1, WL)
            L += 2 * a
            el += 2 * ea
        if binomials == "omega":
            g = g_eval(k, q, W, ctx)
            gf = g.fixed(W)
        (xr, wr), xi = _neg_exponent_product(ex, L, WL)
        fm, fe = exp_fixed(xr, wr, W)
        if xi is None:
            fr, fi = fm, None
            e_f = fe
        else:
            cc, ss, ec = expi_fixed(xi[0], xi[1], W)
            fr = fm * cc >> W
            fi = fm * ss >> W
            # |f| <= 1: fm * ec + |e^{i.}| * fe + truncation
            e_f = ec + fe + 2
        e_kernel = max(e_kernel, e_f)
        if binomials == "omega":
            tr = gf * fr >> W
            ti = gf * fi >> W if fi is not None else None
        else:
            tr = c * fr
            ti = c * fi if fi is not None else None
        if q & 1:
            acc_re -= tr
            if ti is not None:
                acc_im -= ti
        else:
            acc_re += tr
            if ti is not None:
                acc_im += ti
        c = c * (k - q) // (q + 1)
        f_bits = max(f_bits, fr.bit_length())
    ctx.stats.op_count += 3 * (k + 1)
    # input errors, in ulps at W: d/ds (q+1)^-s = -ln(q+1) (q+1)^-s, |(q+1)^-s| <= 1
    smag = abs(ex.re.to_fraction()) + (abs(ex.im.to_fraction()) if ex.im is not None else 0)
    lmax = Fraction(int(L + el), 1 << WL)
    e_in = smag * Fraction(int(el), 1 << WL) * 2 + lmax * ex.eps * 2
    if ex.im is not None:
        e_in *= 2
    e_f = e_kernel + int(e_in * 2**W) + 1
    if binomials == "omega":
        # |g*| <= 2^k + 1, g* within 2 ulps, one truncation per term
        err = (k + 1) * (((1 << k) + 1) * e_f + 4)
    else:
        # exact binomials summing to 2^k
        err = e_f << k
    live = acc_re.bit_length() + (acc_im.bit_length() if acc_im is not None else 0)
    live += k + 2 * f_bits + L.bit_length()
    return HTerm(acc_re, acc_im, err, W, live)


def h_fixed(k: int, W: int, ex: Exponent, ctx: EvalContext, binomials: str = "exact") -> HTerm:
    if binomials not in ("exact", "omega"):
        raise ValueError("binomials must be 'exact' or 'omega'")
    if ex.integer is not None and binomials == "exact":
        ctx.stats.op_count += k + 1
        return _h_integer(k, W, ex.integer)
    return _h_general(k, W, ex, binomials, ctx)


def h_eval_ball(k: int, s, n3: int, plan: Optional[PrecisionPlan] = None, ctx: Optional[EvalContext] = None,
                binomials: str = "exact") -> Ball:
    s = as_real(s)
    ctx = ctx or EvalContext()
    W = ctx.need_precision(plan.n4(k) if plan is not None else n3 + C3 * k + _bits(k + 2) + C4)
    ex = prepare_exponent(s, None, W + _bits(k + 2) + 4, ctx)
    h = h_fixed(k, W, ex, ctx, binomials)
    ball = Ball.from_error(Dyadic(int(h.re), -W), Fraction(int(h.err), 1 << W))
    if not ball.within(n3):
        raise AssertionError(f"h({k}) radius above 2**-{n3}")
    return ball


def h_eval(k: int, s, n3: int, plan: Optional[PrecisionPlan] = None, ctx: Optional[EvalContext] = None,
           binomials: str = "exact") -> Dyadic:
    return h_eval_ball(k, s, n3, plan, ctx, binomials).center


# ---------------------------------------------------------------------------
# u(s)


@dataclass
class SeriesSum:
    """Streaming result of u: fixed-point accumulators plus the certified error."""

    re: int
    im: Optional[int]
    w: int
    err: Fraction
    terms: int
    tail: Fraction


def u_series(ex: Exponent, plan: PrecisionPlan, ctx: EvalContext, binomials: str = "exact",
             tail_scale_bits: int = 0) -> SeriesSum:
    """Sum 2**-(k+1) h(k, s) for k = 0..iota, streaming.

    ``tail_scale_bits`` is b with |h(k, s)| <= 2**b for all k (0 for real s).
    """
    Wu = plan.u_scale
    iota = plan.iota
    ctx.count_terms(iota + 1)
    ure = mpz(0)
    uim = mpz(0) if ex.im is not None else None
    eu = 0
    for k in range(iota + 1):
        ctx.check_time()
        W = ctx.need_precision(plan.n4(k))
        h = h_fixed(k, W, ex, ctx, binomials)
        sh = W + k + 1 - Wu
        if sh >= 0:
            ure += h.re >> sh
            if uim is not None:
                uim += h.im >> sh
            eu += _ceil_shift(int(h.err), sh) + 1
        else:
            ure += h.re << -sh
            if uim is not None:
                uim += h.im << -sh
            eu += int(h.err) << -sh
        live = h.live_bits + ure.bit_length() + (uim.bit_length() if uim is not None else 0)
        ctx.stats.observe_bits(live)
    tail = pow2(tail_scale_bits - iota - 1)
    err = Fraction(eu, 1 << Wu)
    if uim is not None:
        # componentwise bounds -> modulus
        err *= 2
    return SeriesSum(int(ure), None if uim is None else int(uim), Wu, err + tail, iota + 1, tail)


def u_eval_ball(s, n2: int, p: int, plan: Optional[PrecisionPlan] = None, ctx: Optional[EvalContext] = None,
                binomials: str = "exact") -> Ball:
    """u(s) = (1 - 2**(1-s)) zeta(s) within 2**-(n2-1)."""
    s = as_real(s)
    ctx = ctx or EvalContext()
    if plan is None or plan.n2 != n2:
        plan = plan_from_n1(n2 - 1, p)
    for attempt in range(2):
        ex = prepare_exponent(s, None, plan.m, ctx)
        res = u_series(ex, plan, ctx, binomials)
        ball = Ball.from_error(Dyadic(res.re, -res.w), res.err)
        if ball.within(n2 - 1):
            return ball
        ctx.violation(f"u_eval radius above 2**-{n2 - 1}")
        plan = plan_from_n1(2 * plan.n1, p)
    raise AssertionError("u_eval could not certify its target")


def u_eval(s, n2: int, p: int, plan: Optional[PrecisionPlan] = None, ctx: Optional[EvalContext] = None,
           binomials: str = "exact") -> Dyadic:
    return u_eval_ball(s, n2, p, plan, ctx, binomials).center


# ---------------------------------------------------------------------------
# v(s) and the product


def two_pow_one_minus(s: ApproxReal, p: int) -> ApproxReal:
    """2**(1-s) as an approximation, via (1+x)**h with x = 1."""
    h = one_minus(s)
    return FnReal(lambda m, ctx: pow1p_real(ConstReal(ONE), h, m, 2, 2**p, ctx), 0, "2^(1-s)")


def v_eval_ball(s, n1: int, p: int, ctx: Optional[EvalContext] = None) -> Ball:
    """1 / (1 - 2**(1-s)) using 1 - 2**(1-s) >= 1 - 2**-lambda >= 2**-(p+1)."""
    s = as_real(s)
    ctx = ctx or EvalContext()
    w = two_pow_one_minus(s, p)
    a = FnReal(lambda m, c: ONE - w.query(m, c), 0, "1-2^(1-s)")
    return inv_to_prec_ball(a, n1, p + 1, ctx)


def v_eval(s, n1: int, p: int, ctx: Optional[EvalContext] = None) -> Dyadic:
    return v_eval_ball(s, n1, p, ctx).center


def zeta_real(s, n: int, ctx: Optional[EvalContext] = None, p: Optional[int] = None,
              binomials: str = "exact") -> Ball:
    """zeta(s) for real s > 1 as a ball of radius at most 2**-n."""
    s = as_real(s)
    ctx = ctx or EvalContext()
    if n < 0:
        raise ValueError("n must be nonnegative")
    with metered(ctx.stats):
        pl = plan(n, s, ctx, p)
        ctx.plan = pl
        pp = pl.p

        def u_at(m, c):
            sub = pl if m == pl.n1 else plan_from_n1(m, pp)
            return u_eval(s, m + 1, pp, sub, c, binomials)

        v = FnReal(lambda m, c: v_eval(s, m, pp, c), 2 * pp, "v")
        u = FnReal(u_at, 0, "u")
        ball = mul_to_prec_ball(v, u, n, 2 * pp, ctx)
    return ball


__all__ = [
    "C1",
    "C3",
    "C4",
    "C5",
    "C6",
    "Exponent",
    "PrecisionPlan",
    "SeriesSum",
    "SeriesTermState",
    "binom_recip",
    "c2",
    "choose_p",
    "f_eval",
    "g_eval",
    "h_eval",
    "h_eval_ball",
    "h_fixed",
    "lambda_upper",
    "make_plan",
    "plan",
    "plan_from_n1",
    "prepare_exponent",
    "u_eval",
    "u_eval_ball",
    "u_series",
    "v_eval",
    "v_eval_ball",
    "zeta_real",
]
