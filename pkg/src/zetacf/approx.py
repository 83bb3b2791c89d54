"""Binary-converging approximations, balls, precision schedules and metering.

An :class:`ApproxReal` answers ``query(n)`` with a dyadic within ``2**-n`` of
the real it stands for. Operations such as :func:`mul_to_prec` decide the
input precision from an affine :class:`LinearForm` and certify the output
with ball arithmetic computed next to it.
"""

from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .dyadic import (
    ONE,
    ZERO,
    Dyadic,
    dy_from_fraction,
    dy_round,
    parse_decimal,
)
from .errors import ContractError, DomainError, ResourceError

log = logging.getLogger(__name__)

DEFAULT_MAX_BITS = 2**20
DEFAULT_MAX_TERMS = 2**20


# ---------------------------------------------------------------------------
# radius helpers


def ceil_log2_frac(r: Fraction) -> int:
    """Smallest ``k`` with ``r <= 2**k`` for ``r > 0``."""
    num, den = r.numerator, r.denominator
    k = num.bit_length() - den.bit_length()
    # 2**(k-1) < r < 2**(k+1)
    if k >= 0:
        return k if num <= den << k else k + 1
    return k if num << -k <= den else k + 1


def pow2(k: int) -> Fraction:
    return Fraction(1 << k) if k >= 0 else Fraction(1, 1 << -k)


# ---------------------------------------------------------------------------
# resource metering


@dataclass
class ResourceStats:
    peak_bits: int = 0
    max_working_precision: int = 0
    term_count: int = 0
    op_count: int = 0
    elapsed_ms: float = 0.0
    retries: int = 0
    diagnostics: list = field(default_factory=list)

    def observe_bits(self, live_bits: int) -> None:
        if live_bits > self.peak_bits:
            self.peak_bits = live_bits

    def as_json(self) -> dict:
        return {
            "peak_bits": self.peak_bits,
            "max_working_precision": self.max_working_precision,
            "term_count": self.term_count,
            "op_count": self.op_count,
            "elapsed_ms": round(self.elapsed_ms, 3),
        }


class EvalContext:
    """Single-owner evaluation state: memo table, counters and caps.

    Never share one context between two concurrent evaluations.
    """

    def __init__(
        self,
        max_bits: int = DEFAULT_MAX_BITS,
        max_terms: int = DEFAULT_MAX_TERMS,
        timeout: Optional[float] = None,
    ):
        self.stats = ResourceStats()
        self.max_bits = max_bits
        self.max_terms = max_terms
        self.timeout = timeout
        self._started = time.perf_counter()
        self.memo: dict = {}
        self.plan = None

    def need_precision(self, m: int) -> int:
        if m > self.max_bits:
            raise ResourceError(f"working precision {m} exceeds cap of {self.max_bits} bits")
        if m > self.stats.max_working_precision:
            self.stats.max_working_precision = m
        return m

    def count_terms(self, k: int) -> None:
        self.stats.term_count += k
        if self.stats.term_count > self.max_terms:
            raise ResourceError(f"term count exceeds cap of {self.max_terms}")

    def check_time(self) -> None:
        if self.timeout is not None and time.perf_counter() - self._started > self.timeout:
            raise ResourceError(f"timeout of {self.timeout} s exceeded")

    def violation(self, what: str) -> None:
        """Record a schedule violation that triggered a retry."""
        self.stats.retries += 1
        self.stats.diagnostics.append(what)
        log.warning("schedule violation: %s", what)


def meter_scope(stats: ResourceStats, action: Callable[[], object]) -> ResourceStats:
    """Run ``action`` and add its wall time to ``stats``."""
    with metered(stats):
        action()
    return stats


@contextmanager
def metered(stats: ResourceStats):
    t0 = time.perf_counter()
    try:
        yield stats
    finally:
        stats.elapsed_ms += (time.perf_counter() - t0) * 1e3


# ---------------------------------------------------------------------------
# approximations


class ApproxReal:
    """A real number that can be queried at any precision ``2**-n``.

    ``hint`` is an optional magnitude exponent ``p`` with ``|x| <= 2**p``.
    ``exact`` is set when the value is a known dyadic.
    """

    hint: Optional[int] = None
    exact: Optional[Dyadic] = None

    def _compute(self, n: int, ctx: EvalContext) -> Dyadic:
        raise NotImplementedError

    def query(self, n: int, ctx: Optional[EvalContext] = None) -> Dyadic:
        if n < 0:
            raise ValueError("precision must be nonnegative")
        if ctx is None:
            ctx = EvalContext()
        entry = ctx.memo.get(self)
        if entry is None:
            entry = ctx.memo[self] = [{}, -1, None]
        answers = entry[0]
        d = answers.get(n)
        if d is not None:
            return d
        best_n, best = entry[1], entry[2]
        if best_n > n:
            d = dy_round(best, n + 1)
        else:
            d = self._compute(n, ctx)
            entry[1], entry[2] = n, d
        if self.hint is not None and _exceeds(d, self.hint, n):
            raise ContractError(f"value {float(d):.6g} violates magnitude hint 2**{self.hint}")
        answers[n] = d
        return d


def _exceeds(d: Dyadic, p: int, n: int) -> bool:
    """True when ``|d| > 2**p + 2**-n``, i.e. no real within the ball fits the hint."""
    return abs(d.to_fraction()) > pow2(p) + pow2(-n)


class ConstReal(ApproxReal):
    def __init__(self, d: Dyadic):
        self.exact = d
        self.hint = None if d.is_zero() else _ceil_log2_abs(d)

    def _compute(self, n, ctx):
        return dy_round(self.exact, n)

    def __repr__(self):
        return f"ConstReal({self.exact!r})"


class RationalReal(ApproxReal):
    """An exact rational, such as a decimal numeral that is not dyadic."""

    def __init__(self, value: Fraction):
        self.value = Fraction(value)
        self.hint = None if self.value == 0 else ceil_log2_frac(abs(self.value))

    def _compute(self, n, ctx):
        return dy_from_fraction(self.value, n)

    def __repr__(self):
        return f"RationalReal({self.value})"


class FnReal(ApproxReal):
    """Wraps ``fn(n, ctx) -> Dyadic`` which must honour the ``2**-n`` contract."""

    def __init__(self, fn: Callable[[int, EvalContext], Dyadic], hint: Optional[int] = None, name: str = "fn"):
        self.fn = fn
        self.hint = hint
        self.name = name

    def _compute(self, n, ctx):
        return self.fn(n, ctx)

    def __repr__(self):
        return f"FnReal({self.name})"


def _ceil_log2_abs(d: Dyadic) -> int:
    return ceil_log2_frac(abs(d.to_fraction()))


def make_const(d) -> ConstReal:
    if not isinstance(d, Dyadic):
        d = Dyadic(d)
    return ConstReal(d)


def as_real(x) -> ApproxReal:
    """Coerce ints, dyadics, fractions and decimal text into an ApproxReal."""
    if isinstance(x, ApproxReal):
        return x
    if isinstance(x, Dyadic):
        return ConstReal(x)
    if isinstance(x, int):
        return ConstReal(Dyadic(x))
    if isinstance(x, str):
        x = parse_decimal(x)
    if isinstance(x, Fraction):
        den = x.denominator
        if den & (den - 1) == 0:
            return ConstReal(dy_from_fraction(x, 0))
        return RationalReal(x)
    raise TypeError(f"cannot interpret {x!r} as a real")


def query(x: ApproxReal, n: int, ctx: Optional[EvalContext] = None) -> Dyadic:
    return x.query(n, ctx)


# ---------------------------------------------------------------------------
# balls


@dataclass(frozen=True)
class Ball:
    """Certifies ``|x - center| <= 2**radius_exp``; ``radius_exp=None`` means exact."""

    center: Dyadic
    radius_exp: Optional[int] = None

    @property
    def radius(self) -> Fraction:
        return Fraction(0) if self.radius_exp is None else pow2(self.radius_exp)

    @classmethod
    def from_error(cls, center: Dyadic, err: Fraction) -> Ball:
        """Smallest power-of-two ball around ``center`` covering ``err``."""
        if err < 0:
            raise ValueError("negative error bound")
        return cls(center, None if err == 0 else ceil_log2_frac(Fraction(err)))

    def lo(self) -> Fraction:
        return self.center.to_fraction() - self.radius

    def hi(self) -> Fraction:
        return self.center.to_fraction() + self.radius

    def contains(self, x) -> bool:
        x = x.to_fraction() if isinstance(x, Dyadic) else Fraction(x)
        return self.lo() <= x <= self.hi()

    def intersects(self, other: Ball) -> bool:
        return self.lo() <= other.hi() and other.lo() <= self.hi()

    def within(self, n: int) -> bool:
        """True when the radius is at most ``2**-n``."""
        return self.radius_exp is None or self.radius_exp <= -n


def ball_add(a: Ball, b: Ball) -> Ball:
    return Ball.from_error(a.center + b.center, a.radius + b.radius)


def ball_mul(a: Ball, b: Ball) -> Ball:
    ca, cb = abs(a.center.to_fraction()), abs(b.center.to_fraction())
    ra, rb = a.radius, b.radius
    return Ball.from_error(a.center * b.center, ca * rb + cb * ra + ra * rb)


def ball_round(a: Ball, n: int) -> Ball:
    c = dy_round(a.center, n)
    return Ball.from_error(c, a.radius + abs((a.center - c).to_fraction()))


# ---------------------------------------------------------------------------
# precision schedules


@dataclass(frozen=True)
class LinearForm:
    """Affine schedule ``const + sum(coeff_i * arg_i)`` with nonnegative integer coefficients."""

    const: int
    coeffs: tuple
    names: tuple = ()

    def __post_init__(self):
        if self.const < 0 or any(c < 0 for c in self.coeffs):
            raise ValueError("linear form coefficients must be nonnegative")

    def __call__(self, *args: int) -> int:
        return lf_eval(self, args)


def lf_eval(L: LinearForm, args) -> int:
    args = tuple(args)
    if len(args) != len(L.coeffs):
        raise ValueError(f"linear form takes {len(L.coeffs)} arguments, got {len(args)}")
    return L.const + sum(c * a for c, a in zip(L.coeffs, args))


# |ab - a'b'| <= |a'|2^-m + |b|2^-m, so m = n + p + 2 leaves room for truncation
L_MUL = LinearForm(2, (1, 1), ("n", "p"))
# |1/a - 1/a'| <= 2^-m / (|a||a'|) with |a|, |a'| >~ 2^-p
L_INV = LinearForm(2, (1, 2), ("n", "p"))


def mul_to_prec_ball(a: ApproxReal, b: ApproxReal, n: int, p: int, ctx: Optional[EvalContext] = None) -> Ball:
    ctx = ctx or EvalContext()
    m = ctx.need_precision(L_MUL(n, p))
    for attempt in range(2):
        am, bm = a.query(m, ctx), b.query(m, ctx)
        for v in (am, bm):
            if _exceeds(v, p, m):
                raise ContractError(f"operand {float(v):.6g} violates |x| <= 2**{p}")
        prod = am * bm
        center = dy_round(prod, n + 2)
        eps = pow2(-m)
        err = (abs(am.to_fraction()) + abs(bm.to_fraction())) * eps + eps * eps
        err += abs((prod - center).to_fraction())
        ctx.stats.op_count += 1
        if err <= pow2(-n):
            return Ball.from_error(center, err)
        ctx.violation(f"mul_to_prec radius exceeds 2**-{n} at m={m}")
        m = ctx.need_precision(2 * m)
    raise ContractError(f"mul_to_prec could not certify 2**-{n}")


def mul_to_prec(a: ApproxReal, b: ApproxReal, n: int, p: int, ctx: Optional[EvalContext] = None) -> Dyadic:
    return mul_to_prec_ball(a, b, n, p, ctx).center


def recip_trunc(d: Dyadic, w: int) -> Dyadic:
    """``1/d`` truncated toward zero at ``2**-w``; ``d`` nonzero."""
    m, e = d.mantissa, d.exponent
    shift = w - e
    q = (1 << shift) // abs(m) if shift >= 0 else 0
    return Dyadic(q if m > 0 else -q, -w)


def inv_to_prec_ball(a: ApproxReal, n: int, p: int, ctx: Optional[EvalContext] = None) -> Ball:
    ctx = ctx or EvalContext()
    m = ctx.need_precision(L_INV(n, p))
    for attempt in range(2):
        am = a.query(m, ctx)
        eps = pow2(-m)
        mag = abs(am.to_fraction())
        if mag + eps < pow2(-p) or mag <= eps:
            raise DomainError(f"value {float(am):.6g} is not certifiably >= 2**-{p} in magnitude")
        center = recip_trunc(am, n + 2)
        err = eps / (mag * (mag - eps)) + abs(1 / am.to_fraction() - center.to_fraction())
        ctx.stats.op_count += 1
        if err <= pow2(-n):
            return Ball.from_error(center, err)
        ctx.violation(f"inv_to_prec radius exceeds 2**-{n} at m={m}")
        m = ctx.need_precision(2 * m)
    raise ContractError(f"inv_to_prec could not certify 2**-{n}")


def inv_to_prec(a: ApproxReal, n: int, p: int, ctx: Optional[EvalContext] = None) -> Dyadic:
    return inv_to_prec_ball(a, n, p, ctx).center


__all__ = [
    "ApproxReal",
    "Ball",
    "ConstReal",
    "EvalContext",
    "FnReal",
    "LinearForm",
    "L_INV",
    "L_MUL",
    "RationalReal",
    "ResourceStats",
    "as_real",
    "ball_add",
    "ball_mul",
    "ball_round",
    "ceil_log2_frac",
    "inv_to_prec",
    "inv_to_prec_ball",
    "lf_eval",
    "make_const",
    "meter_scope",
    "metered",
    "mul_to_prec",
    "mul_to_prec_ball",
    "pow2",
    "query",
    "recip_trunc",
    "ONE",
    "ZERO",
]
