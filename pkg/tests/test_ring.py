from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dworkcrystal.errors import ConfigurationError, NotAUnit, NotInvertibleModP
from dworkcrystal.ring import (
    BaseRing,
    PAdicScalar,
    ParamSeries,
    RingMatrix,
    factorial_valuation,
    matrix_invert,
    p_power_over_factorial,
    p_valuation,
    padic_fraction,
    rank_mod_p,
    unit_inverse,
)

primes = st.sampled_from([3, 5, 7])


def test_valuation_basics():
    assert p_valuation(75, 5) == 2
    assert p_valuation(0, 5) is None or p_valuation(0, 5) > 50
    assert factorial_valuation(25, 5) == 6


@given(primes, st.integers(1, 4), st.integers())
def test_unit_inverse_roundtrip(p, s, a):
    x = PAdicScalar(a, s, p)
    if a % p == 0:
        with pytest.raises(NotAUnit):
            unit_inverse(x)
    else:
        assert int(x * unit_inverse(x)) == 1


@given(primes, st.integers(1, 4), st.integers(-50, 50), st.integers(1, 50))
def test_fraction_matches_rational(p, s, num, den):
    if den % p == 0:
        return
    x = padic_fraction(num, den, p, s)
    assert (int(x) * den - num) % p**s == 0


@given(primes, st.integers(0, 12), st.integers(1, 4))
def test_p_power_over_factorial_is_integral(p, r, s):
    value = Fraction(p**r, __import__("math").factorial(r))
    x = p_power_over_factorial(r, p, s)
    # num/den with den prime to p
    assert (int(x) * value.denominator - value.numerator) % p**s == 0


def test_mixed_precision_rejected():
    with pytest.raises(ConfigurationError):
        PAdicScalar(1, 2, 5) + PAdicScalar(1, 3, 5)


series_coeffs = st.lists(st.integers(-30, 30), min_size=1, max_size=8)


@given(primes, series_coeffs, series_coeffs)
def test_series_ring_axioms(p, a, b):
    x = ParamSeries(a, p, 2, 10)
    y = ParamSeries(b, p, 2, 10)
    assert x * y == y * x
    assert (x + y) - y == x
    assert x * (y + x) == x * y + x * x


@given(primes, series_coeffs)
def test_series_inverse(p, a):
    x = ParamSeries([1 + p * a[0]] + a[1:], p, 3, 12)
    prod = x * x.inverse()
    assert prod == ParamSeries.constant(1, p, 3, prod.cap)


@given(primes, series_coeffs)
def test_frobenius_is_ring_map(p, a):
    x = ParamSeries(a, p, 2, 30)
    y = ParamSeries(list(reversed(a)), p, 2, 30)
    lhs, rhs = (x * y).frobenius(), x.frobenius() * y.frobenius()
    # Frobenius keeps the cap conservatively, so the two sides may carry different error terms
    common = min(lhs.cap, rhs.cap)
    assert lhs.truncate(common) == rhs.truncate(common)


@given(primes, series_coeffs, series_coeffs)
def test_theta_is_derivation(p, a, b):
    x = ParamSeries(a, p, 2, 10)
    y = ParamSeries(b, p, 2, 10)
    th = lambda z: z.derivative("theta")
    assert th(x * y) == th(x) * y + x * th(y)


def test_series_inverse_with_pole():
    # t + t^2 is invertible once negative exponents are allowed
    x = ParamSeries([0, 1, 1], 5, 2, 10)
    inv = x.inverse()
    assert inv.shift == -1
    prod = x * inv
    assert prod == ParamSeries.constant(1, 5, 2, prod.cap)
    assert prod.cap is not None and prod.cap >= 9


def _mat(rows, p, s):
    return RingMatrix([[PAdicScalar(a, s, p) for a in r] for r in rows])


@given(primes, st.lists(st.integers(0, 200), min_size=4, max_size=4))
def test_matrix_inverse(p, entries):
    A = _mat([entries[:2], entries[2:]], p, 3)
    det = entries[0] * entries[3] - entries[1] * entries[2]
    if det % p == 0:
        with pytest.raises(NotInvertibleModP):
            matrix_invert(A)
        assert rank_mod_p(A) < 2
    else:
        assert A @ matrix_invert(A) == RingMatrix.identity(2, A[0, 0])


def test_base_ring_exact_units():
    R = BaseRing.integers()
    assert R.is_unit(1) and R.is_unit(-1)
    assert not R.is_unit(2)
    S = BaseRing.residues(5, 2)
    assert S.is_unit(2) and not S.is_unit(10)
