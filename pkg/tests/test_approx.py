import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zetacf.approx import (
    L_INV,
    L_MUL,
    Ball,
    ConstReal,
    EvalContext,
    FnReal,
    LinearForm,
    RationalReal,
    ResourceStats,
    as_real,
    ball_add,
    ball_mul,
    ball_round,
    inv_to_prec,
    inv_to_prec_ball,
    lf_eval,
    make_const,
    meter_scope,
    mul_to_prec,
    mul_to_prec_ball,
    query,
)
from zetacf.dyadic import ONE, ZERO, Dyadic, dy_round
from zetacf.errors import ContractError, DomainError, ResourceError
from zetacf.zeta_real import zeta_real

from conftest import frac

small_dyadics = st.builds(Dyadic, st.integers(-(2**40), 2**40), st.integers(-40, -38))


def test_make_const_examples():
    assert make_const(Dyadic(1, -1)).query(10) == Dyadic(1, -1)
    assert make_const(0).query(7) == ZERO
    assert make_const(Dyadic(13, -4)).query(2) == Dyadic(3, -2)


def test_query_examples():
    d = Dyadic(12345, -13)
    x = make_const(d)
    assert query(x, 5) == dy_round(d, 5)
    ctx = EvalContext()
    z = FnReal(lambda m, c: zeta_real(2, m, c).center, 1, "zeta2")
    a = z.query(20, ctx)
    assert z.query(20, ctx) is a
    pi2_6 = Fraction(16449340668482264, 10**16)
    assert abs(frac(a) - pi2_6) <= Fraction(1, 2**20) + Fraction(1, 10**15)


def test_memo_reuses_higher_precision():
    calls = []

    def fn(m, ctx):
        calls.append(m)
        return dy_round(Dyadic(1, 0) - Dyadic(1, -200), m)

    x = FnReal(fn)
    ctx = EvalContext()
    x.query(100, ctx)
    lo = x.query(40, ctx)
    assert calls == [100]
    assert abs(frac(lo) - (1 - Fraction(1, 2**200))) <= Fraction(1, 2**40)


def test_hint_violation_is_contract_error():
    x = FnReal(lambda m, c: Dyadic(5), hint=1)
    with pytest.raises(ContractError):
        x.query(10)


def test_as_real():
    assert as_real("0.5").exact == Dyadic(1, -1)
    assert as_real(3).exact == Dyadic(3)
    r = as_real("0.1")
    assert isinstance(r, RationalReal)
    assert abs(frac(r.query(30)) - Fraction(1, 10)) <= Fraction(1, 2**30)
    with pytest.raises(TypeError):
        as_real(1.5)


def test_lf_eval():
    L = LinearForm(3, (1, 2), ("n", "p"))
    assert lf_eval(L, (10, 4)) == 21
    assert lf_eval(LinearForm(5, (0, 0)), (10, 4)) == 5
    assert lf_eval(L, (11, 4)) >= lf_eval(L, (10, 4))
    with pytest.raises(ValueError):
        lf_eval(L, (1,))
    with pytest.raises(ValueError):
        LinearForm(-1, (1,))
    assert L_MUL(10, 3) == 15 and L_INV(10, 3) == 18


@given(st.integers(0, 100), st.integers(0, 100), st.integers(0, 10))
def test_lf_monotone(n, p, d):
    for L in (L_MUL, L_INV):
        assert L(n + d, p) >= L(n, p) and L(n, p + d) >= L(n, p)


def test_mul_examples():
    a = make_const(Dyadic(3, -1))
    assert abs(frac(mul_to_prec(a, a, 4, 1)) - Fraction(9, 4)) <= Fraction(1, 16)
    assert mul_to_prec(make_const(0), a, 10, 1) == ZERO


def test_mul_random():
    rnd = random.Random(1)
    for _ in range(200):
        a = Dyadic(rnd.randrange(-(2**60), 2**60), -59)
        b = Dyadic(rnd.randrange(-(2**60), 2**60), -59)
        r = mul_to_prec(make_const(a), make_const(b), 32, 1)
        assert abs(frac(r) - frac(a) * frac(b)) <= Fraction(1, 2**32)


def test_mul_irrational_operands():
    third = RationalReal(Fraction(1, 3))
    ctx = EvalContext()
    b = mul_to_prec_ball(third, third, 100, 0, ctx)
    assert b.within(100) and b.contains(Fraction(1, 9))
    assert ctx.stats.retries == 0


def test_mul_hint_violation():
    with pytest.raises(ContractError):
        mul_to_prec(make_const(8), make_const(1), 10, 1)


def test_inv_examples():
    assert abs(frac(inv_to_prec(make_const(Dyadic(1, -1)), 8, 1)) - 2) <= Fraction(1, 256)
    assert inv_to_prec(make_const(1), 20, 0) == ONE
    r = inv_to_prec(make_const(Dyadic(3, -2)), 32, 1)
    assert abs(frac(r) - Fraction(4, 3)) <= Fraction(1, 2**32)


def test_inv_domain_error():
    with pytest.raises(DomainError):
        inv_to_prec(make_const(Dyadic(1, -20)), 10, 4)
    with pytest.raises(DomainError):
        inv_to_prec(make_const(0), 10, 4)


@settings(max_examples=60)
@given(st.integers(1, 2**30), st.integers(0, 12), st.integers(0, 80), st.booleans())
def test_schedules_sufficient(num, p, n, neg):
    """The runtime ball meets 2**-n at the scheduled precision: no retries."""
    x = RationalReal(Fraction(-num if neg else num, 3 * 2**30 + 1) * 2**p)
    ctx = EvalContext()
    pp = max(p, 0)
    b = mul_to_prec_ball(x, x, n, pp, ctx)
    assert b.within(n) and b.contains(x.value**2)
    if abs(x.value) >= Fraction(1, 2**pp):
        c = inv_to_prec_ball(x, n, pp, ctx)
        assert c.within(n) and c.contains(1 / x.value)
    assert ctx.stats.retries == 0


def test_ball_examples():
    a = Ball(ONE, -4)
    s = ball_add(a, a)
    assert s.center == Dyadic(2) and s.radius_exp <= -3
    z = ball_mul(Ball(ZERO), Ball(Dyadic(5), -2))
    assert z.center == ZERO and z.radius_exp is None
    r = ball_round(Ball(Dyadic(13, -4), -10), 2)
    assert r.contains(Fraction(13, 16))


def test_ball_containment_monte_carlo():
    rnd = random.Random(7)
    for _ in range(200):
        a = Ball(Dyadic(rnd.randrange(-1000, 1000), -8), rnd.randrange(-12, -2))
        b = Ball(Dyadic(rnd.randrange(-1000, 1000), -8), rnd.randrange(-12, -2))
        s, m = ball_add(a, b), ball_mul(a, b)
        for _ in range(50):
            x = a.center.to_fraction() + a.radius * Fraction(rnd.randrange(-1000, 1001), 1000)
            y = b.center.to_fraction() + b.radius * Fraction(rnd.randrange(-1000, 1001), 1000)
            assert s.contains(x + y) and m.contains(x * y)


def test_meter_scope():
    st_ = ResourceStats()
    meter_scope(st_, lambda: None)
    assert (st_.op_count, st_.term_count, st_.peak_bits) == (0, 0, 0)
    ctx = EvalContext()
    a = make_const(Dyadic(3, -1))
    meter_scope(ctx.stats, lambda: mul_to_prec(a, a, 10, 1, ctx))
    one = ctx.stats.op_count
    meter_scope(ctx.stats, lambda: mul_to_prec(a, a, 12, 1, ctx))
    assert ctx.stats.op_count == 2 * one
    assert set(ctx.stats.as_json()) == {"peak_bits", "max_working_precision", "term_count", "op_count", "elapsed_ms"}


def test_caps():
    ctx = EvalContext(max_bits=100)
    with pytest.raises(ResourceError):
        ctx.need_precision(101)
    ctx = EvalContext(max_terms=10)
    ctx.count_terms(10)
    with pytest.raises(ResourceError):
        ctx.count_terms(1)
    ctx = EvalContext(timeout=0.0)
    with pytest.raises(ResourceError):
        ctx.check_time()


def test_working_precision_grows_linearly():
    ws = []
    for n in (256, 512):
        ctx = EvalContext()
        zeta_real(2, n, ctx)
        ws.append(ctx.stats.max_working_precision)
    # doubling n at most doubles m plus a constant
    assert ws[1] <= 2 * ws[0] + 64
