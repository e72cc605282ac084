import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from maass_periods.specfun import (ConvergenceError, PrecisionConfig, check_integral_W, hyp1f1_series, hyp2f1,
                                   inc_gamma, legendre_P, script_M, script_W, whittaker_M, whittaker_W)

KAPPAS = [-4.5, -0.5, 0.5, 1.5]


def rel(a, b):
    return abs(a - b) / abs(b)


def test_precision_config_validation():
    with pytest.raises(ValueError):
        PrecisionConfig(target_rel_error=0)
    with pytest.raises(ValueError):
        PrecisionConfig(max_terms=0)


def test_W_examples():
    assert rel(script_W(-4.5, 1 + 2.25, 3.0), math.exp(-1.5)) < 1e-14
    assert rel(script_W(-0.5, 1.25, -2.0), math.exp(1.0) * float(mpmath.gammainc(1.5, 2.0))) < 1e-12
    z, mu = 1.5, 0.25
    assert rel(whittaker_W(0, mu, 2 * z), math.sqrt(2 * z / math.pi) * special.kv(mu, z)) < 1e-10


@pytest.mark.parametrize("kappa", KAPPAS)
def test_special_values(kappa):
    s = 1 - kappa / 2
    for y in np.linspace(0.1, 20, 15):
        assert rel(script_W(kappa, s, y), math.exp(-y / 2)) < 1e-10
        ref = float(mpmath.exp(y / 2) * mpmath.gammainc(1 - kappa, y))
        assert rel(script_W(kappa, s, -y), ref) < 1e-10


@given(st.floats(-2.5, 2.5), st.floats(0.05, 3.0), st.floats(0.05, 40))
@settings(max_examples=60, deadline=None)
def test_whittaker_W_generic_against_mpmath(kappa, mu, y):
    ref = float(mpmath.whitw(kappa, mu, y))
    if abs(ref) < 1e-250:
        return
    assert rel(whittaker_W(kappa, mu, y), ref) < 1e-8


@given(st.floats(-3, 3), st.floats(0.1, 3.0), st.floats(0.01, 30))
@settings(max_examples=60, deadline=None)
def test_whittaker_M_against_mpmath(kappa, mu, v):
    assert rel(whittaker_M(kappa, mu, v), float(mpmath.whitm(kappa, mu, v))) < 1e-9


def test_whittaker_M_examples():
    assert rel(whittaker_M(0, 0.5, 1.0), 2 * math.sinh(0.5)) < 1e-12
    kappa, s, v = -4.5, 3.25, 2.7
    assert rel(script_M(kappa, s, v) * v ** (kappa / 2), whittaker_M(-kappa / 2, s - 0.5, v)) < 1e-14
    vals = [script_M(-4.5, 3.25, v) for v in np.linspace(1, 10, 40)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_whittaker_M_parameter_pole():
    with pytest.raises((ValueError, ConvergenceError)):
        whittaker_M(0.3, -1.0, 1.0)


def test_hyp1f1_against_closed_form():
    assert rel(hyp1f1_series(1, 2, 1.3), (math.exp(1.3) - 1) / 1.3) < 1e-13


def test_inc_gamma_examples():
    assert rel(inc_gamma(1, 0.5), math.exp(-0.5)) < 1e-14
    assert rel(inc_gamma(5.5, 0), math.gamma(5.5)) < 1e-14
    quad, _ = integrate.quad(lambda t: math.exp(-t) * t ** 4.5, 2.0, np.inf, epsabs=0, epsrel=1e-13)
    assert rel(inc_gamma(5.5, 2.0), quad) < 1e-9


@given(st.floats(-6, 8).filter(lambda s: abs(s - round(s)) > 1e-3 or s > 0.5), st.floats(0.01, 50))
@settings(max_examples=80)
def test_inc_gamma_against_mpmath(s, x):
    assert rel(inc_gamma(s, x), float(mpmath.gammainc(s, x))) < 1e-10


def test_hyp2f1_examples():
    assert abs(hyp2f1(3, 5, 5, 0.5) - 8) < 1e-10 * 8
    assert hyp2f1(1.3, 0.4, 2.2, 0) == 1
    a, b, c, z, h = 3, 3.5, 6.5, 0.3, 1e-5
    f = lambda t: t ** a * hyp2f1(a, b, c, t)
    deriv = (f(z + h) - f(z - h)) / (2 * h)
    assert rel(deriv, a * z ** (a - 1) * hyp2f1(a + 1, b, c, z)) < 1e-8


@given(st.floats(-3, 5), st.floats(-3, 5), st.floats(0, 0.9))
def test_hyp2f1_b_equals_c(a, b, z):
    if abs(b - round(b)) < 1e-3 or abs(a) < 1e-3:
        return
    assert abs(hyp2f1(a, b, b, z) * (1 - z) ** a - 1) < 1e-10


@given(st.floats(0.1, 4), st.floats(-2, 3), st.floats(0.3, 5), st.floats(0, 0.9))
@settings(max_examples=60)
def test_hyp2f1_against_mpmath(a, b, c, z):
    ref = float(mpmath.hyp2f1(a, b, c, z))
    if abs(ref) < 1e-8:
        return
    assert rel(hyp2f1(a, b, c, z), ref) < 1e-9


def test_legendre_examples():
    assert legendre_P(2, 1) == 1
    assert legendre_P(3, 0) == 0
    assert abs(legendre_P(2, 0.5) + 0.125) < 1e-15


@given(st.integers(0, 12), st.floats(-1, 1))
def test_legendre_parity_and_oracle(ell, x):
    assert abs(legendre_P(ell, -x) - (-1) ** ell * legendre_P(ell, x)) < 1e-12
    assert abs(legendre_P(ell, x) - special.eval_legendre(ell, x)) < 1e-12


def test_legendre_complex_argument():
    z = 0.3j
    assert abs(legendre_P(3, z) - (5 * z ** 3 - 3 * z) / 2) < 1e-15


@pytest.mark.parametrize("kappa,s,alpha,beta", [(0.5, 3.25, 12 * math.pi, 4 * math.pi), (0.5, 1.25, 1, 1),
                                                (0.5, 3.25, 1.0, 1.0), (-0.5, 2.0, 2.0, 3.0)])
def test_integral_W(kappa, s, alpha, beta):
    lhs, rhs = check_integral_W(kappa, s, alpha, beta)
    assert rel(lhs, rhs) < 1e-6


def test_integral_W_scaling():
    kappa, s, alpha, beta = 0.5, 1.25, 1.0, 1.0
    _, r1 = check_integral_W(kappa, s, alpha, beta)
    l2, r2 = check_integral_W(kappa, s, alpha, 2 * beta)
    # W_{0,mu}(2x) = sqrt(2x/pi) K_mu(x)
    w = lambda x: math.sqrt(2 * x / math.pi) * special.kv(1.5 - 2 * s - 0.5, x)
    ratio = 2 ** (kappa / 2 - 0.75) * w(2 * math.sqrt(2 * alpha * beta)) / w(2 * math.sqrt(alpha * beta))
    assert rel(r2 / r1, ratio) < 1e-12
    assert rel(l2, r2) < 1e-6


def test_integral_W_rejects_bad_parameters():
    with pytest.raises(ValueError):
        check_integral_W(0.5, 1.25, -1.0, 1.0)
    with pytest.raises(ValueError):
        script_W(0.5, 1.25, 0.0)
