import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maass_periods.cycles import (CycleError, GeodesicCycle, cycle_from_matrix, elliptic_coeff_numeric,
                                  elliptic_coeff_Q, elliptic_coeff_Q_raising, integrate_path, pairing,
                                  path_independence_check, plan_path, raising_hypergeometric_check)
from maass_periods.merom import EtaTwoAtI, QExpansionForm, ramanujan_delta_coeffs
from maass_periods.qf import LatticeVector


@pytest.fixture(scope="module")
def G():
    return QExpansionForm(ramanujan_delta_coeffs(30), 6)


@pytest.fixture(scope="module")
def eta2():
    return EtaTwoAtI()


def test_cycle_examples():
    c = cycle_from_matrix((2, 1, 1, 1))
    assert c.Q == (1, -1, -1) and c.d_gamma == 5
    c2 = cycle_from_matrix((5, 2, 2, 1))
    assert c2.Q == (2, -4, -2) and c2.d_gamma == 32
    for g in [(1, 1, 0, 1), (2, 1, 1, 2), (5, 3, 3, 2)]:
        with pytest.raises(CycleError):
            cycle_from_matrix(g)


@pytest.mark.parametrize("g", [(2, 1, 1, 1), (5, 2, 2, 1), (3, 1, 2, 1), (7, 3, 2, 1)])
def test_cycle_geometry(g):
    c = cycle_from_matrix(g)
    lo, hi = c.fixed_points
    assert abs(c.Q_of_z(lo)) < 1e-12 and abs(c.Q_of_z(hi)) < 1e-12
    assert abs(c.act(lo) - lo) < 1e-12
    # base point and its image lie on the semicircle over the fixed points
    for z in (c.base_point, c.endpoint):
        assert abs(abs(z - (lo + hi) / 2) - (hi - lo) / 2) < 1e-12
    back = GeodesicCycle.from_dict(json.loads(c.with_waypoints([0.5 + 2j]).to_json()))
    assert back.gamma == c.gamma and back.waypoints == [0.5 + 2j] and back.path_policy == "custom_waypoints"


def test_integrate_path_polynomial():
    c = cycle_from_matrix((2, 1, 1, 1))
    z0, z1 = c.base_point, c.endpoint
    pieces = plan_path(c.with_waypoints([1 + 2j]))
    I, err, _ = integrate_path(lambda z: z ** 3 - 2j * z, pieces)
    exact = (z1 ** 4 - z0 ** 4) / 4 - 1j * (z1 ** 2 - z0 ** 2)
    assert abs(I - exact) < 1e-13 * abs(exact)


def test_cusp_form_pairing_path_and_base_point(G):
    c = cycle_from_matrix((3, 1, 2, 1))
    ref = pairing(G, c, 6)
    other = pairing(G, c.with_waypoints([1 + 1.5j]), 6)
    assert abs(other.projected - ref.projected) < 1e-10 * abs(ref.projected)
    lo, hi = c.fixed_points
    m, rad = (lo + hi) / 2, (hi - lo) / 2
    moved = pairing(G, c.with_base_point(m + rad * complex(math.cos(2.0), math.sin(2.0))), 6)
    assert abs(moved.projected - ref.projected) < 1e-10 * abs(ref.projected)
    assert pairing(lambda z: 0j, c, 6).value == 0


def test_pairing_bilinear(G, eta2):
    c = cycle_from_matrix((3, 1, 2, 1))
    a, b = 1.7, -0.3
    r = pairing(lambda z: a * eta2(z) + b * G(z), c, 6, ([1j], 1))
    r1, r2 = pairing(eta2, c, 6, ([1j], 1)), pairing(G, c, 6, ([1j], 1))
    assert abs(r.projected - (a * r1.projected + b * r2.projected)) < 1e-10 * max(r.scale, 1)


@pytest.mark.parametrize("g", [(2, 1, 1, 1), (3, 1, 2, 1), (7, 3, 2, 1)])
def test_canonical_pairing_vanishes(eta2, g):
    r = pairing(eta2, cycle_from_matrix(g), 2, ([1j], 1))
    assert abs(r.value) <= 1e-6 * max(r.magnitude, r.scale)


def test_path_independence_with_loop(eta2):
    c = cycle_from_matrix((3, 1, 2, 1))
    r1, r2, pred = path_independence_check(eta2, c, 2, ([1j], 1), cycle2=c.with_waypoints([1.2 + 1.5j]),
                                           residues={1j: 2.0})
    assert abs(r1.value - r2.value) < 1e-10
    jump = r1.projected - r2.projected
    assert abs(pred) > 1
    assert abs(jump - pred) < 1e-8 * abs(pred)
    same = path_independence_check(eta2, c, 2, ([1j], 1), residues={1j: 2.0})
    assert same[0].projected == same[1].projected and same[2] == 0
    with pytest.raises(CycleError):
        path_independence_check(eta2, c, 2, ([1j], 1), cycle2=c.with_base_point(0.5 + 2j))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.floats(-2, 2), st.floats(0.3, 2))
def test_elliptic_coeff_real_and_contour(k, x, y):
    rho = complex(x, y)
    g = (2, 1, 1, 1)
    v = elliptic_coeff_Q(g, rho, k)
    Q = lambda z: (z * z - z - 1) ** (k - 1)
    ref = elliptic_coeff_numeric(Q, rho, 2 - 2 * k, k - 1, radius=0.5, samples=4 * k + 8)
    assert abs(ref.imag) <= 1e-10 * max(1, abs(ref))
    assert abs(v - ref.real) <= 1e-9 * max(1, abs(v))


def test_elliptic_coeff_raising():
    rho = complex(0.3, 0.9)
    v = elliptic_coeff_Q((2, 1, 1, 1), rho, 3)
    fd, err = elliptic_coeff_Q_raising((2, 1, 1, 1), rho, 3)
    assert abs(fd - v) < 1e-6 * abs(v)
    with pytest.raises(CycleError):
        elliptic_coeff_Q((1, 1, 0, 1), rho, 3)


@pytest.mark.parametrize("k", [2, 3])
def test_raising_hypergeometric(k):
    X = LatticeVector(0.5, 0, 0.5, 1)
    z = 0.2 + 1.1j
    lhs, rhs, _ = raising_hypergeometric_check(k, 1, float(X.q), X, z)
    assert abs(lhs - rhs) < 1e-4 * abs(rhs)
    Xm = LatticeVector(-0.5, 0, -0.5, 1)
    lhs2, rhs2, _ = raising_hypergeometric_check(k, 1, float(Xm.q), Xm, z)
    # sgn(p_z) and Q_X(z) both change sign, so the right side is invariant under X -> -X
    assert abs(rhs2 - rhs) < 1e-12 * abs(rhs)
    assert abs(lhs2 - rhs2) < 1e-4 * abs(rhs)


def test_raising_hypergeometric_domain():
    X = LatticeVector(0.5, 0, 0.5, 1)
    with pytest.raises(ValueError):
        raising_hypergeometric_check(2, 1, 0.25, X, 0.2 + 1.1j)
    with pytest.raises(ValueError):
        raising_hypergeometric_check(2, 1, -1.0, X, 0.2 + 1.1j)
    # w = 2|m| / p_z(X)^2 >= 1 close to the geodesic of X
    with pytest.raises(ValueError, match="outside"):
        raising_hypergeometric_check(2, 1, float(X.q), X, 0.0 + 1.0j)
