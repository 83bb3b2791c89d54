from fractions import Fraction

import pytest

from zetacf.errors import DomainError, ResourceError
from zetacf.reference import (
    _shifted_chebyshev_quotient,
    oracle_binom_exact,
    oracle_eta_alternating,
    oracle_zeta_dirichlet,
    oracle_zeta_euler_maclaurin,
)

from conftest import frac, ln2_enclosure, pi_enclosure


def _contains(res, lo, hi):
    c = frac(res.value)
    return lo - res.radius <= c <= hi + res.radius


def test_dirichlet_examples():
    lo, hi = pi_enclosure(60)
    r = oracle_zeta_dirichlet(2, 20)
    assert r.radius_exp <= -20 and _contains(r, lo**2 / 6, hi**2 / 6)
    r = oracle_zeta_dirichlet(30, 40)
    assert abs(frac(r.value) - (1 + Fraction(1, 2**30))) <= Fraction(1, 2**40) + Fraction(1, 3**30) * 2
    vals = [frac(oracle_zeta_dirichlet(Fraction(k, 4), 30).value) for k in range(5, 20)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(DomainError):
        oracle_zeta_dirichlet(1, 10)


def test_eta_examples():
    lo, hi = ln2_enclosure(80)
    assert _contains(oracle_eta_alternating(1, 48), lo, hi)
    plo, phi = pi_enclosure(80)
    assert _contains(oracle_eta_alternating(2, 48), plo**2 / 12, phi**2 / 12)
    # direct branch
    r = oracle_eta_alternating(2, 10)
    assert r.method == "alternating" and _contains(r, plo**2 / 12, phi**2 / 12)
    with pytest.raises(DomainError):
        oracle_eta_alternating(Fraction(1, 1000), 10)


def test_alternating_partial_sums_bracket():
    s = 2
    partial, sums = Fraction(0), []
    for k in range(1, 12):
        partial += Fraction((-1) ** (k + 1), k**s)
        sums.append(partial)
    plo, phi = pi_enclosure(60)
    for a, b in zip(sums, sums[1:]):
        assert min(a, b) <= plo**2 / 12 and phi**2 / 12 <= max(a, b)


def test_chebyshev_coefficients():
    r, d = _shifted_chebyshev_quotient(3)
    assert (r, d) == ([98, -80, 32], 99)
    # acceleration of sum (-1)^k / (k+1) = ln 2
    r, d = _shifted_chebyshev_quotient(20)
    approx = sum(Fraction(c, k + 1) for k, c in enumerate(r)) / d
    lo, hi = ln2_enclosure(80)
    assert abs(approx - lo) <= Fraction(1, d)


def test_em_examples():
    a = oracle_zeta_euler_maclaurin(2, 0, 60)
    b = oracle_zeta_dirichlet(2, 60)
    assert abs(frac(a.value.re) - frac(b.value)) <= a.radius + b.radius
    c = oracle_zeta_euler_maclaurin("0.5", 0, 48)
    assert abs(frac(c.value.re) - Fraction("-1.4603545088095868")) <= Fraction(1, 10**16)
    p = oracle_zeta_euler_maclaurin("0.7", "5.5", 40)
    m = oracle_zeta_euler_maclaurin("0.7", "-5.5", 40)
    assert abs(frac(p.value.re) - frac(m.value.re)) <= p.radius + m.radius
    assert abs(frac(p.value.im) + frac(m.value.im)) <= p.radius + m.radius
    with pytest.raises(DomainError):
        oracle_zeta_euler_maclaurin(1, 0, 10)
    with pytest.raises(DomainError):
        oracle_zeta_euler_maclaurin(0, 2, 10)


def test_oracles_agree_via_eta():
    """zeta = eta / (1 - 2^(1-s)) links the two real oracles."""
    z = oracle_zeta_dirichlet(3, 80)
    e = oracle_eta_alternating(3, 80)
    lhs = frac(e.value)
    rhs = frac(z.value) * Fraction(3, 4)
    assert abs(lhs - rhs) <= e.radius + z.radius


def test_binom_exact():
    assert oracle_binom_exact(4, 2) == 6
    assert oracle_binom_exact(9, 0) == 1
    for k in range(1, 65):
        for q in range(1, k + 1):
            assert oracle_binom_exact(k, q) == oracle_binom_exact(k - 1, q - 1) + (
                oracle_binom_exact(k - 1, q) if q <= k - 1 else 0
            )
    with pytest.raises(ResourceError):
        oracle_binom_exact(10, 3, cap=5)


def test_caps():
    with pytest.raises(ResourceError):
        oracle_zeta_dirichlet(2, 200, cap=10)
