from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maass_periods.arith import (Discriminant, divisors, forward_divisor_sum, invert_divisor_sum, is_fundamental,
                                 kronecker, moebius, sqrt_mod_4N)

FUNDAMENTAL = [d for d in range(-40, 41) if d != 0 and is_fundamental(d)]


def _kronecker_oracle(a, n):
    # Jacobi symbol by Euler's criterion over the factorisation, plus the (a/2) and (a/-1) rules
    if n == 0:
        return 1 if abs(a) == 1 else 0
    out = 1
    if n < 0:
        n = -n
        if a < 0:
            out = -out
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        out *= 1 if a % 8 in (1, 7) else -1
    p = 3
    while n > 1:
        while n % p == 0:
            n //= p
            r = pow(a % p, (p - 1) // 2, p)
            if r == 0:
                return 0
            out *= 1 if r == 1 else -1
        p += 2
    return out


def test_kronecker_examples():
    assert kronecker(5, 1) == 1
    assert kronecker(5, 5) == 0
    assert kronecker(-3, 2) == -1


@pytest.mark.parametrize("delta", FUNDAMENTAL)
def test_kronecker_matches_oracle(delta):
    for n in range(-30, 60):
        assert kronecker(delta, n) == _kronecker_oracle(delta, n), n


@given(st.sampled_from(FUNDAMENTAL), st.integers(1, 100), st.integers(1, 100))
def test_kronecker_multiplicative(delta, d1, d2):
    assert kronecker(delta, d1 * d2) == kronecker(delta, d1) * kronecker(delta, d2)


def test_sqrt_mod_examples():
    assert sqrt_mod_4N(1, 1) == [1]
    assert sqrt_mod_4N(-3, 1) == [1]
    # brute force: 1^2 = 1 = 5 mod 4
    assert sqrt_mod_4N(5, 1) == [1]
    assert sqrt_mod_4N(2, 1) == []


@given(st.integers(-200, 200), st.integers(1, 12))
def test_sqrt_mod_brute_force(delta, N):
    roots = sqrt_mod_4N(delta, N)
    assert roots == [r for r in range(2 * N) if (r * r - delta) % (4 * N) == 0]


def test_discriminant_type():
    assert Discriminant.fundamental(-3).is_fundamental
    assert Discriminant.fundamental(-4).sign == -1
    assert int(Discriminant.fundamental(1)) == 1
    assert Discriminant(-12).value == -12
    with pytest.raises(ValueError):
        Discriminant.fundamental(-12)
    with pytest.raises(ValueError):
        Discriminant(2)
    assert [d for d in range(-12, 13) if is_fundamental(d)] == [-11, -8, -7, -4, -3, 1, 5, 8, 12]


def test_divisors_and_moebius():
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert [moebius(n) for n in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]


def test_invert_small_prefix():
    k, delta = 6, -3
    b = np.array([2.0 + 1j, -3.5 + 0.25j])
    a = invert_divisor_sum(b, k, delta)
    assert a[0] == b[0]
    expected = b[1] / 2 ** (2 * k - 1) - kronecker(delta, 2) * 2.0 ** -k * b[0]
    assert abs(a[1] - expected) < 1e-15


def _forward_oracle(a, k, delta):
    return [n ** (2 * k - 1) * sum(Fraction(kronecker(delta, d), d ** k) * a[n // d - 1]
                                   for d in range(1, n + 1) if n % d == 0) for n in range(1, len(a) + 1)]


@given(st.lists(st.fractions(max_denominator=50).filter(lambda x: abs(x) < 1000), min_size=1, max_size=14),
       st.integers(2, 7), st.sampled_from(FUNDAMENTAL))
@settings(max_examples=60)
def test_round_trip_exact(a, k, delta):
    b = forward_divisor_sum(a, k, delta)
    assert list(b) == _forward_oracle(a, k, delta)
    assert list(invert_divisor_sum(b, k, delta)) == a


@given(st.integers(0, 2**32 - 1), st.integers(2, 7), st.sampled_from(FUNDAMENTAL))
@settings(max_examples=40)
def test_round_trip_float(seed, k, delta):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=10) + 1j * rng.normal(size=10)
    back = invert_divisor_sum(forward_divisor_sum(a, k, delta), k, delta)
    assert np.abs(back - a).max() <= 1e-12 * np.abs(a).max()
