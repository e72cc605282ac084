"""Fourier coefficients of f two ways (takes about half a minute).

Route 1 samples f on horizontal lines and takes an FFT.  Route 2 evaluates the
harmonic Maass Poincare series P_{-9/2,-1,1} by direct summation, separates its
holomorphic coefficients c+(3n^2, n) with two sampling heights and feeds them
into the twisted divisor-sum formula.  The two routes share no code beyond the
argument reduction.
"""

import time

import numpy as np

from maass_periods.maass import PoincareSeries, poincare_coefficients
from maass_periods.merom import FormSum, fourier_coeffs, predicted_coeffs
from maass_periods.weil import WeilRep

k, Delta, rho, n_max = 6, -3, 1, 6

f = FormSum(k, 1, -1, 1, Delta, rho)
t0 = time.perf_counter()
direct = fourier_coeffs(f, 1.0, n_max, samples=256, y2=1.25)
print(f"direct route: {time.perf_counter() - t0:.1f}s")

t0 = time.perf_counter()
P = PoincareSeries(WeilRep(1, dual=True), 1.5 - k, -1, 1)
table = poincare_coefficients(P, [3 * n * n for n in range(1, n_max + 1)])
pred = predicted_coeffs(table, k, Delta, rho, n_max)
print(f"Poincare route: {time.perf_counter() - t0:.1f}s\n")

print(" n   c+(3n^2)              b_n (direct)                 rel. diff")
for n in range(1, n_max + 1):
    c = table.cplus(3 * n * n, n % 2).real
    b = direct[n]
    print(f"{n:2d}  {c: .12e}  {b.real: .6e}{b.imag:+.6e}j  {abs(b - pred[n]) / abs(b):.1e}")

# the normalised coefficients are real: b_n / (i pi^k sqrt(Delta)) has no imaginary part
ratio = np.array([direct[n] / (1j * np.pi ** k * 1j * np.sqrt(3)) for n in range(1, n_max + 1)])
print("\nmax |Im| / |Re| of normalised coefficients:", float(np.max(np.abs(ratio.imag) / np.abs(ratio.real))))
