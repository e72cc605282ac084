import math

import numpy as np
import pytest

from maass_periods.maass import (CoeffTable, PoincareSeries, extract_coeffs_two_height, hecke_Tp,
                                 laplacian_numeric, raising_numeric)
from maass_periods.weil import MetaplecticElement, S_ELT, WeilRep


@pytest.fixture(scope="module")
def series():
    return PoincareSeries(WeilRep(1, dual=True), -4.5, -1, 1)


def theta_table(n_max=40):
    """Jacobi theta series of weight 1/2 for rho_L, N = 1: an eigenform of every T(p^2)."""
    holo = {(0, 0): 1}
    for n in range(1, n_max):
        holo[(n * n, n % 2)] = 2
    for D in range(1, n_max * n_max):
        r = D % 4 and 1 or 0
        if D % 4 in (0, 1):
            holo.setdefault((D, r), 0)
    return CoeffTable(1, 0.5, False, holo, D_min=0)


def test_validation():
    rep = WeilRep(1, dual=True)
    with pytest.raises(ValueError):
        PoincareSeries(rep, 0.5, -1, 1)
    with pytest.raises(ValueError):
        PoincareSeries(rep, -4.0, -1, 1)
    with pytest.raises(ValueError):
        PoincareSeries(rep, -4.5, 3, 1)
    with pytest.raises(ValueError):
        PoincareSeries(rep, -4.5, -1, 1, s=0.9)


@pytest.mark.parametrize("g", [S_ELT, MetaplecticElement(1, 1, 0, 1), MetaplecticElement(2, 1, 1, 1)])
def test_covariance_direct_sums(series, g):
    tau = complex(0.13, 0.9)
    lhs = series.direct(g.act(tau))
    rhs = g.phi(tau) ** (2 * series.kappa) * series.rep.matrix(g) @ series.direct(tau)
    assert np.abs(lhs - rhs).max() < 1e-10 * np.abs(rhs).max()


def test_reduction_matches_direct(series):
    tau = complex(0.37, 0.42)
    assert np.abs(series(tau) - series.direct(tau)).max() < 1e-10 * np.abs(series(tau)).max()


def test_principal_part(series):
    t = extract_coeffs_two_height(series, series.kappa, 1, True, 1.0, 1.25, [-1, 3, 7], M=32)
    assert abs(t.holo[(-1, 1)] - series.vec[1]) < 1e-10
    assert t.residual[(3, 1)] < 1e-8


@pytest.mark.slow
def test_laplacian_eigenvalue():
    rep = WeilRep(1, dual=True)
    kap, tau = -4.5, complex(0.13, 0.9)
    P_gen = PoincareSeries(rep, kap, -1, 1, s=3.0)
    lam = 3.0 * (1 - 3.0) + (kap * kap - 2 * kap) / 4
    lap, _ = laplacian_numeric(lambda z: P_gen(z, False), kap, tau)
    val = P_gen(tau, False)
    assert np.abs(lap - lam * val).max() < 1e-5 * np.abs(lam * val).max()
    P_harm = PoincareSeries(rep, kap, -1, 1)
    lap, _ = laplacian_numeric(lambda z: P_harm(z, False), kap, tau)
    assert np.abs(lap).max() < 1e-5 * np.abs(P_harm(tau, False)).max()


@pytest.mark.parametrize("alpha, kappa", [(0.5, -4.5), (2.0, 1.5), (-1.0, 0.5)])
def test_raising_power_of_v(alpha, kappa):
    F = lambda t: np.array([t.imag ** alpha])
    tau = complex(0.3, 1.7)
    v1, _ = raising_numeric(F, kappa, 1, tau)
    assert abs(v1[0] - (alpha + kappa) * tau.imag ** (alpha - 1)) < 1e-8
    v2, _ = raising_numeric(F, kappa, 2, tau, h=1e-2)
    exact = (alpha + kappa) * (alpha + kappa + 1) * tau.imag ** (alpha - 2)
    assert abs(v2[0] - exact) < 1e-6 * max(1, abs(exact))


@pytest.mark.parametrize("p", [3, 5, 7])
def test_hecke_theta_eigenform(p):
    t = theta_table()
    out = hecke_Tp(t, p)
    eig = 1 + 1 / p
    for (D, r), v in out.holo.items():
        assert abs(v - eig * t.holo[(D, r)]) < 1e-12, (D, r)


def test_hecke_errors():
    t = theta_table()
    with pytest.raises(ValueError):
        hecke_Tp(t, 4)
    with pytest.raises(KeyError):
        hecke_Tp(t, 3, indices=[(10**6, 0)])
    t2 = CoeffTable(2, 0.5, False, {(1, 1): 1})
    with pytest.raises(ValueError):
        hecke_Tp(t2, 2)


def test_table_roundtrip_and_lookup():
    t = CoeffTable(1, -4.5, True, {(-1, 1): 2, (3, 1): 1.5 - 2j}, {(-1, 1): 0.25}, D_min=-1,
                   residual={(3, 1): 1e-9})
    back = CoeffTable.from_json(t.to_json())
    assert back == t
    assert back.cplus(3) == 1.5 - 2j
    assert back.cplus(-4) == 0
    with pytest.raises(KeyError):
        back.cplus(7)
    with pytest.raises(ValueError):
        CoeffTable(1, -4.5, True, {(2, 1): 1})
