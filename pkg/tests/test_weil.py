import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maass_periods.weil import S_ELT, T_ELT, MetaplecticElement, WeilRep, reduce_to_fundamental, word_decomposition


def theta(tau, N, terms=40):
    """Theta series sum_{n = r mod 2N} q^{n^2/4N} e_r, weight 1/2 for rho_L."""
    out = np.zeros(2 * N, dtype=complex)
    for n in range(-terms, terms + 1):
        out[n % (2 * N)] += cmath.exp(2j * math.pi * tau * n * n / (4 * N))
    return out


def random_element(draw_ints):
    g = MetaplecticElement(1, 0, 0, 1)
    for tok, n in draw_ints:
        g = g * (T_ELT if tok == 0 else S_ELT) if n == 0 else g * MetaplecticElement(1, n, 0, 1)
    return g


words = st.lists(st.tuples(st.integers(0, 1), st.integers(-3, 3)), min_size=1, max_size=8)


def test_generator_examples():
    rep = WeilRep(1)
    assert np.allclose(rep.matrix(T_ELT), np.diag([1, 1j]), atol=1e-15)
    S = rep.matrix(S_ELT)
    e = cmath.exp(-2j * math.pi / 8) / math.sqrt(2)
    assert np.allclose(S[0], [e, e], atol=1e-15)
    dual = WeilRep(1, dual=True)
    assert np.allclose(dual.matrix(T_ELT), np.diag([1, -1j]), atol=1e-15)


def test_metaplectic_validation():
    with pytest.raises(ValueError):
        MetaplecticElement(1, 1, 1, 1)
    with pytest.raises(ValueError):
        MetaplecticElement(1, 0, 0, 1, branch=2)


@pytest.mark.parametrize("N", [1, 2, 3, 5])
@pytest.mark.parametrize("dual", [False, True])
@given(w1=words, w2=words)
@settings(max_examples=25, deadline=None)
def test_homomorphism_and_unitarity(N, dual, w1, w2):
    rep = WeilRep(N, dual)
    g1, g2 = random_element(w1), random_element(w2)
    lhs = rep.matrix(g1 * g2)
    rhs = rep.matrix(g1) @ rep.matrix(g2)
    assert np.abs(lhs - rhs).max() < 1e-11
    assert np.abs(lhs @ lhs.conj().T - np.eye(2 * N)).max() < 1e-12


@pytest.mark.parametrize("N", [1, 2, 3])
def test_theta_transformation(N):
    rep = WeilRep(N)
    tau = complex(0.21, 0.93)
    for g in [T_ELT, S_ELT, MetaplecticElement(2, 1, 1, 1), MetaplecticElement(1, 0, 3, 1),
              MetaplecticElement(-1, 0, 0, -1), MetaplecticElement(5, 2, 2, 1, -1)]:
        lhs = theta(g.act(tau), N)
        rhs = g.phi(tau) * rep.matrix(g) @ theta(tau, N)
        assert np.abs(lhs - rhs).max() < 1e-10 * np.abs(rhs).max()


def test_rho_of_minus_identity():
    rep = WeilRep(2)
    Z = S_ELT * S_ELT
    M = rep.matrix(Z)
    for r in range(4):
        col = np.zeros(4)
        col[r] = 1
        expected = np.zeros(4, dtype=complex)
        expected[(-r) % 4] = -1j
        assert np.allclose(M @ col, expected)
    assert np.allclose(rep.matrix(Z * Z), -np.eye(4))


@given(st.integers(-30, 30), st.integers(-30, 30))
def test_word_decomposition(c, d):
    if math.gcd(c, d) != 1:
        return
    # complete (c, d) to a matrix
    if c == 0:
        a, b = d, 0
    else:
        a = pow(d, -1, abs(c)) if abs(c) > 1 else 0
        b = (a * d - 1) // c
    M = np.eye(2, dtype=int)
    for tok, n in word_decomposition(a, b, c, d):
        if tok == "T":
            M = M @ np.array([[1, n], [0, 1]])
        elif tok == "S":
            M = M @ np.array([[0, -1], [1, 0]])
        else:
            M = -M
    assert M.tolist() == [[a, b], [c, d]]


@given(st.floats(-20, 20), st.floats(0.01, 5))
def test_reduce_to_fundamental(x, y):
    tau = complex(x, y)
    (a, b, c, d), t = reduce_to_fundamental(tau)
    assert a * d - b * c == 1
    assert abs((a * tau + b) / (c * tau + d) - t) < 1e-9 * max(1, abs(t))
    assert abs(t.real) <= 0.5 + 1e-12 and abs(t) >= 1 - 1e-12
