"""zeta(sigma + i t) for sigma > 0 off the exceptional set.

Same series as the real case with complex accumulators. Two ingredients
change:

* the prefactor 1 / (1 - 2**(1-s)) has no a-priori bound, so
  :func:`exceptional_guard` certifies one at runtime;
* |h(k, s)| is no longer bounded by 1. From the integral form
  h(k, s) = Gamma(s)**-1 * int t**(s-1) e**-t (1 - e**-t)**k dt and the product
  formula for |Gamma(sigma + i t)|, |h(k, s)| <= sqrt(1 + t²/sigma²) e**(pi |t| / 2),
  which bounds both the tail and |u(s)|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .approx import ApproxReal, EvalContext, as_real, ceil_log2_frac, metered, pow2
from .dyadic import ONE, Dyadic, dy_from_fraction
from .elementary import (
    ComplexBall,
    ComplexDyadic,
    _sqrt_lower,
    _sqrt_upper,
    cdy_round,
    pow1p_complex_ball,
    pow1p_real_ball,
)
from .errors import ContractError, DomainError
from .zeta_real import (
    PrecisionPlan,
    neg_real,
    one_minus,
    plan_from_n1,
    prepare_exponent,
    u_series,
)

DEFAULT_GUARD_BITS = 64
# componentwise kernel errors are a few ulps larger than in the real loop
N4_EXTRA = 2
_TWO_PI_OVER_LN2 = 2 * math.pi / math.log(2)


@dataclass(frozen=True)
class ComplexPlan(PrecisionPlan):
    """A precision plan plus the quantities only complex ``s`` needs."""

    p_t: int = 0
    guard_exp: int = 0
    gamma_bits: int = 0
    p_w: int = 1


def _interval(x: ApproxReal, m: int, ctx: EvalContext):
    xm = x.query(m, ctx).to_fraction()
    eps = pow2(-m)
    return xm - eps, xm + eps


def exceptional_point(t: float) -> tuple[int, str]:
    """Nearest point 1 + 2 pi i k / ln 2 to the line of ordinate ``t``."""
    k = round(t / _TWO_PI_OVER_LN2)
    im = k * _TWO_PI_OVER_LN2
    return k, f"s = 1 + 2*pi*i*{k}/ln 2 (= 1{im:+.15g}i)"


def _pow_bits(sigma: ApproxReal, t: ApproxReal, ctx: EvalContext) -> int:
    """p with |1 - sigma|, |t| <= 2**p, for 2**(1-s) = (1+1)**(1-s)."""
    lo, hi = _interval(sigma, 16, ctx)
    tlo, thi = _interval(t, 16, ctx)
    mag = max(abs(1 - lo), abs(1 - hi), abs(tlo), abs(thi))
    return max(1, ceil_log2_frac(mag) if mag else 1)


def two_pow_one_minus_ball(sigma: ApproxReal, t: ApproxReal, n: int, p_w: int,
                           ctx: EvalContext) -> ComplexBall:
    return pow1p_complex_ball(ONE, (one_minus(sigma), neg_real(t)), n, p_w, ctx)


def exceptional_guard(s, working_n: int = DEFAULT_GUARD_BITS + 8, guard_bits: int = DEFAULT_GUARD_BITS,
                      ctx: Optional[EvalContext] = None) -> int:
    """Certified ``e`` with |1 - 2**(1-s)| >= 2**e.

    ``s`` is a pair (sigma, t). Raises :class:`DomainError` naming the
    nearest exceptional point when the distance cannot be certified to be at
    least ``2**-guard_bits``.
    """
    sigma, t = (as_real(v) for v in s)
    ctx = ctx or EvalContext()
    p_w = _pow_bits(sigma, t, ctx)
    wn = max(working_n, guard_bits + 4)
    if t.exact is not None and t.exact.is_zero():
        # real power: exact for integer exponents
        rb = pow1p_real_ball(ONE, one_minus(sigma), wn, 2, 2**p_w, ctx)
        lo = abs(1 - rb.center.to_fraction()) - rb.radius
    else:
        wb = two_pow_one_minus_ball(sigma, t, wn, p_w, ctx)
        a = ComplexDyadic(ONE - wb.center.re, -wb.center.im)
        lo = _sqrt_lower(a.abs2()) - wb.radius
    if lo < pow2(-guard_bits):
        _, name = exceptional_point(float(t.query(64, ctx)))
        raise DomainError(
            f"s is within 2**-{guard_bits} of the exceptional point {name}, where 2**(1-s) = 1"
        )
    return -ceil_log2_frac(1 / lo)


def gamma_ratio_bits(sig_lo: Fraction, t_hi: Fraction) -> int:
    """b with sqrt(1 + t²/sigma²) e**(pi |t|/2) <= 2**b for sigma >= sig_lo, |t| <= t_hi."""
    if t_hi == 0:
        return 0
    ratio = float(t_hi) / float(sig_lo)
    bits = 0.5 * math.log2(1 + ratio * ratio) + float(t_hi) * math.pi / (2 * math.log(2))
    # one bit of slack covers float rounding
    return math.ceil(bits) + 1


def complex_plan(n: int, sigma, t, ctx: Optional[EvalContext] = None,
                 guard_bits: int = DEFAULT_GUARD_BITS) -> ComplexPlan:
    sigma, t = as_real(sigma), as_real(t)
    ctx = ctx or EvalContext()
    m = 16
    while True:
        lo, hi = _interval(sigma, m, ctx)
        if hi <= 0:
            raise DomainError(f"sigma = {float((lo + hi) / 2):.6g} <= 0 lies outside the supported half-plane sigma > 0")
        if lo > 0:
            break
        if m >= 4096:
            raise DomainError("sigma cannot be separated from 0")
        m *= 2
    e = exceptional_guard((sigma, t), guard_bits + 8, guard_bits, ctx)
    tlo, thi = _interval(t, m, ctx)
    t_abs = max(abs(tlo), abs(thi)) if t.exact is None else abs(t.exact.to_fraction())
    p = max(1, ceil_log2_frac(hi), ceil_log2_frac(1 / lo))
    p_t = max(0, ceil_log2_frac(t_abs)) if t_abs else 0
    gb = gamma_ratio_bits(lo, t_abs)
    n1 = n + max(-e, gb, 0) + 3
    base = plan_from_n1(n1, p, n, n4_extra=N4_EXTRA)
    # tail 2**(gb - iota - 1) must stay below 2**-(n2 + 2); double iota until it does
    iota = base.iota
    while gb - iota - 1 > -(base.n2 + 2):
        ctx.violation(f"series tail above budget at iota={iota}; doubling")
        iota *= 2
    if iota != base.iota:
        base = plan_from_n1(n1, p, n, extra_iota=iota - base.iota, n4_extra=N4_EXTRA)
    return ComplexPlan(
        **{f: getattr(base, f) for f in ("n", "p", "n1", "n2", "n3", "iota", "m", "constants", "n4_extra")},
        p_t=p_t,
        guard_exp=e,
        gamma_bits=gb,
        p_w=_pow_bits(sigma, t, ctx),
    )


def v_eval_complex_ball(s, n1: int, plan: ComplexPlan, ctx: Optional[EvalContext] = None) -> ComplexBall:
    """1 / (1 - 2**(1-s)) within 2**-n1, using |1 - 2**(1-s)| >= 2**guard_exp."""
    sigma, t = (as_real(v) for v in s)
    ctx = ctx or EvalContext()
    P = max(0, -plan.guard_exp)
    m = ctx.need_precision(n1 + 2 * P + 4)
    for attempt in range(2):
        wb = two_pow_one_minus_ball(sigma, t, m, plan.p_w, ctx)
        a = ComplexDyadic(ONE - wb.center.re, -wb.center.im)
        a2 = a.abs2()
        amag = _sqrt_lower(a2)
        lo = amag - wb.radius
        # the guard certified |a| >= 2**-P and the radius here is far smaller
        if lo < pow2(-P - 1):
            raise DomainError("1 - 2**(1-s) fell below its certified lower bound")
        re = a.re.to_fraction() / a2
        im = -a.im.to_fraction() / a2
        c = ComplexDyadic(dy_from_fraction(re, n1 + 2), dy_from_fraction(im, n1 + 2))
        err = wb.radius / (lo * amag) + abs(re - c.re.to_fraction()) + abs(im - c.im.to_fraction())
        ctx.stats.op_count += 1
        if err <= pow2(-n1):
            return ComplexBall.from_error(c, err)
        ctx.violation(f"v_eval_complex radius above 2**-{n1} at m={m}")
        m = ctx.need_precision(2 * m)
    raise ContractError(f"v_eval_complex could not certify 2**-{n1}")


def v_eval_complex(s, n1: int, plan: ComplexPlan, ctx: Optional[EvalContext] = None) -> ComplexDyadic:
    return v_eval_complex_ball(s, n1, plan, ctx).center


def u_eval_complex_ball(s, plan: ComplexPlan, ctx: Optional[EvalContext] = None,
                        binomials: str = "exact") -> ComplexBall:
    """eta(s) within 2**-n1."""
    sigma, t = (as_real(v) for v in s)
    ctx = ctx or EvalContext()
    ex = prepare_exponent(sigma, t, plan.m, ctx)
    res = u_series(ex, plan, ctx, binomials, tail_scale_bits=plan.gamma_bits)
    im = Dyadic(res.im, -res.w) if res.im is not None else Dyadic(0)
    ball = ComplexBall.from_error(ComplexDyadic(Dyadic(res.re, -res.w), im), res.err)
    if not ball.within(plan.n1):
        raise ContractError(f"u series radius above 2**-{plan.n1}")
    return ball


def zeta_complex(sigma, t, n: int, ctx: Optional[EvalContext] = None, guard_bits: int = DEFAULT_GUARD_BITS,
                 binomials: str = "exact") -> ComplexBall:
    """zeta(sigma + i t) as a disk of radius at most 2**-n."""
    sigma, t = as_real(sigma), as_real(t)
    ctx = ctx or EvalContext()
    if n < 0:
        raise ValueError("n must be nonnegative")
    with metered(ctx.stats):
        pl = complex_plan(n, sigma, t, ctx, guard_bits)
        ctx.plan = pl
        vb = v_eval_complex_ball((sigma, t), pl.n1, pl, ctx)
        ub = u_eval_complex_ball((sigma, t), pl, ctx, binomials)
        prod = vb.center * ub.center
        center = cdy_round(prod, n + 3)
        rv, ru = vb.radius, ub.radius
        err = _sqrt_upper(vb.center.abs2()) * ru + _sqrt_upper(ub.center.abs2()) * rv + rv * ru
        err += _sqrt_upper((prod - center).abs2())
        ctx.stats.op_count += 1
        if err > pow2(-n):
            raise ContractError(f"zeta_complex radius above 2**-{n}")
    return ComplexBall.from_error(center, err)


__all__ = [
    "ComplexPlan",
    "DEFAULT_GUARD_BITS",
    "complex_plan",
    "exceptional_guard",
    "exceptional_point",
    "gamma_ratio_bits",
    "u_eval_complex_ball",
    "v_eval_complex",
    "v_eval_complex_ball",
    "zeta_complex",
]
