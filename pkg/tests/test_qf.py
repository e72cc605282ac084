import cmath
import json
import math
from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maass_periods.arith import sqrt_mod_4N
from maass_periods.qf import (HeegnerDivisor, HeegnerError, LatticeVector, QuadForm, are_gamma0_equivalent,
                              class_reps, genus_char, heegner_divisor, heegner_point, mobius, stabilizer_order)


def reduced_count(d):
    """h(d) including imprimitive forms, by direct enumeration of reduced forms."""
    n, a = 0, 1
    while 3 * a * a <= -d:
        for b in range(-a + 1, a + 1):
            if (b * b - d) % (4 * a) == 0:
                c = (b * b - d) // (4 * a)
                if c > a or (c == a and b >= 0):
                    n += 1
        a += 1
    return n


def gamma0_elements(N, bound=6):
    out = []
    for c in range(-bound, bound + 1):
        if c % N:
            continue
        for d in range(-bound, bound + 1):
            if gcd(c, d) != 1:
                continue
            for a in range(-bound, bound + 1):
                if (a * d - 1) % c == 0 if c else a * d == 1:
                    b = (a * d - 1) // c if c else 0
                    out.append((a, b, c, d))
    return out


def test_class_reps_examples():
    assert [Q.coeffs for Q in class_reps(1, -3, 1)] == [(1, 1, 1)]
    assert sorted(Q.coeffs for Q in class_reps(1, -23, 1)) == sorted([(1, 1, 6), (2, 1, 3), (2, -1, 3)])
    assert [Q.coeffs for Q in class_reps(1, -4, 0)] == [(1, 0, 1)]


def test_class_reps_bad_congruence():
    with pytest.raises(HeegnerError, match="inconsistent"):
        class_reps(1, -3, 0)


@pytest.mark.parametrize("d", [-3, -4, -7, -12, -15, -20, -23, -27, -39, -47, -48, -71, -84])
def test_level_one_class_number(d):
    r = sqrt_mod_4N(d, 1)[0]
    assert len(class_reps(1, d, r)) == reduced_count(d)


@pytest.mark.parametrize("N", [2, 3, 5, 6])
def test_level_N_class_number_coprime(N):
    # for gcd(d, N) = 1 each SL2 class contributes one Gamma_0(N) class to Q_{d,r}
    for d in range(-3, -60, -1):
        if gcd(d, N) != 1:
            continue
        for r in sqrt_mod_4N(d, N):
            assert len(class_reps(N, d, r)) == reduced_count(d), (N, d, r)


@pytest.mark.parametrize("N,d,r", [(2, -4, 2), (2, -7, 1), (3, -3, 3), (3, -12, 0), (4, -15, 1), (5, -11, 3)])
def test_class_reps_pairwise_inequivalent(N, d, r):
    reps = class_reps(N, d, r)
    assert reps == sorted(reps)
    for Q in reps:
        assert Q.disc == d and Q.a % N == 0 and (Q.b - r) % (2 * N) == 0 and Q.a > 0
    for i, P in enumerate(reps):
        for Q in reps[i + 1:]:
            assert not are_gamma0_equivalent(P, Q)


def test_heegner_point_examples():
    assert abs(heegner_point(QuadForm(1, 0, 1)) - 1j) < 1e-15
    assert abs(heegner_point(QuadForm(1, 1, 1)) - complex(-0.5, math.sqrt(3) / 2)) < 1e-15
    with pytest.raises(HeegnerError):
        heegner_point(QuadForm(1, 3, 1))
    with pytest.raises(HeegnerError):
        heegner_point(QuadForm(-1, 0, -1))


@given(st.integers(1, 30), st.integers(-30, 30), st.integers(1, 30))
def test_heegner_point_is_root(a, b, c):
    Q = QuadForm(a, b, c)
    if Q.disc >= 0:
        return
    z = heegner_point(Q)
    assert z.imag > 0
    assert abs(Q(z)) <= 1e-12 * (a * abs(z) ** 2 + abs(b) * abs(z) + c)


def test_stabilizer_examples():
    assert stabilizer_order(QuadForm(1, 0, 1)) == 2
    assert stabilizer_order(QuadForm(1, 1, 1)) == 3
    assert stabilizer_order(QuadForm(1, 1, 6)) == 1
    # i is not an elliptic point of Gamma_0(3)
    assert stabilizer_order(QuadForm(3, 3, 1, 3)) == 3
    assert stabilizer_order(QuadForm(2, 2, 1, 2)) == 2


@pytest.mark.parametrize("N,delta,rho", [(1, -3, 1), (2, -7, 1), (3, -8, 2), (5, -4, 4), (2, 5, 1)])
@given(st.data())
@settings(max_examples=25, deadline=None)
def test_equivariance_and_character_invariance(N, delta, rho, data):
    D = data.draw(st.integers(-40, -1))
    r = data.draw(st.integers(0, 2 * N - 1))
    try:
        div = heegner_divisor(N, delta, rho, D, r)
    except HeegnerError:
        return
    Q = data.draw(st.sampled_from(div.forms))
    g = data.draw(st.sampled_from(gamma0_elements(N)))
    Qg = Q.act(g)
    if Qg.a < 0:
        return
    a, b, c, dd = g
    ginv = (dd, -b, -c, a)
    assert abs(heegner_point(Qg) - mobius(ginv, heegner_point(Q))) < 1e-9
    assert genus_char(delta, Qg) == genus_char(delta, Q)
    assert stabilizer_order(Qg) == stabilizer_order(Q)


def test_genus_char_examples():
    assert genus_char(1, QuadForm(2, 1, 3)) == 1
    assert genus_char(-3, QuadForm(1, 1, 1)) == 1
    # [3, 3, 3] = 3 [1, 1, 1] shares the factor 3 with Delta
    assert genus_char(-3, QuadForm(3, 3, 3)) == 0


def test_genus_char_independent_of_represented_value():
    Q = QuadForm(2, 2, 5)  # disc -36, Delta = -3 divides
    vals = set()
    for x in range(-6, 7):
        for y in range(-6, 7):
            n = Q(x, y)
            if n and gcd(n, 3) == 1:
                from maass_periods.arith import kronecker
                vals.add(kronecker(-3, n))
    assert vals == {genus_char(-3, Q)}


def test_heegner_divisor_examples():
    div = heegner_divisor(1, 1, 1, -3, 1, 2)
    (z, w), = div.points
    assert abs(z - cmath.exp(2j * math.pi / 3)) < 1e-15 and abs(w - 1 / 3) < 1e-15
    div = heegner_divisor(1, -3, 1, -1, 1, 6)
    (z, w), = div.points
    assert div.forms[0].coeffs == (1, 1, 1) and abs(w - 1 / 3) < 1e-15
    assert abs(div.scale - 3 ** 2.5) < 1e-12


def test_heegner_divisor_errors_and_json():
    with pytest.raises(HeegnerError, match="congruent"):
        heegner_divisor(1, -3, 1, -2, 1)
    with pytest.raises(HeegnerError, match="fundamental"):
        heegner_divisor(1, -12, 0, -1, 0)
    div = heegner_divisor(2, -7, 1, -4, 2, 4)
    text = div.to_json()
    back = HeegnerDivisor.from_dict(json.loads(text))
    assert back == div
    assert json.loads(text)["points"][0]["form"] == list(div.forms[0].coeffs)


def test_heegner_divisor_weights():
    div = heegner_divisor(1, 5, 1, -3, 1, 2)
    for Q, w, chi, wt in zip(div.forms, div.stabilizers, div.characters, div.weights):
        assert wt == chi / w and chi in (-1, 0, 1)


@given(st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20), st.integers(1, 6))
def test_lattice_dictionary(a, b, c, N):
    X = LatticeVector(Fraction(a), Fraction(b), Fraction(c), N)
    A, B, C = X.form
    assert A == a * N
    assert X.q == Fraction(B * B - 4 * A * C, 4 * N)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_lattice_action_matches_form_action(N):
    X = LatticeVector(Fraction(2), Fraction(3), Fraction(-1), N)
    for g in gamma0_elements(N, 4)[:40]:
        a, b, c, d = g
        ginv = (d, -b, -c, a)
        Y = X.act(ginv)
        Q = QuadForm(int(X.form[0]), int(X.form[1]), int(X.form[2]), N).act(g)
        assert tuple(int(v) for v in Y.form) == Q.coeffs


@pytest.mark.parametrize("N,delta,rho", [(1, -3, 1), (1, 5, 1), (2, -7, 1), (3, -8, 2), (5, -4, 4), (6, 12, 6)])
def test_genus_char_all_representations_agree(N, delta, rho):
    from maass_periods.arith import kronecker
    seen = 0
    for D in range(-1, -40, -1):
        for r in range(2 * N):
            try:
                div = heegner_divisor(N, delta, rho, D, r)
            except HeegnerError:
                continue
            for Q, chi in zip(div.forms, div.characters):
                a0 = Q.a // N
                vals = set()
                for n1 in (n for n in range(1, N + 1) if N % n == 0):
                    n2 = N // n1
                    for x in range(-5, 6):
                        for y in range(-5, 6):
                            n = a0 * n1 * x * x + Q.b * x * y + Q.c * n2 * y * y
                            if n and gcd(n, delta) == 1:
                                vals.add(kronecker(delta, n))
                if chi:
                    assert vals == {chi}, (Q, vals)
                seen += 1
    assert seen > 5
