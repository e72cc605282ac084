"""A twisted Heegner divisor and the meromorphic form attached to it.

Level 1, k = 6, Delta = -3, rho = 1, D = -1, r = 1.  The forms of discriminant
D|Delta| = 3 form a single class whose Heegner point is the elliptic point
rho = e(1/3), so the form f_{6,-1,1,-3,1} of weight 12 has one pole (mod SL2(Z)).
"""

import cmath
import math

from maass_periods.merom import FormSum, PeterssonEta, residue_at
from maass_periods.qf import heegner_divisor

N, k, Delta, rho, D, r = 1, 6, -3, 1, -1, 1

div = heegner_divisor(N, Delta, rho, D, r, k)
print("Heegner divisor")
for row in div.to_dict()["points"]:
    print("  ", row)

f = FormSum(k, N, D, r, Delta, rho)

# weight-12 modularity under S, evaluated without the fundamental-domain shortcut
z = complex(0.1, 1.3)
lhs, rhs = f._raw(-1 / z), z ** (2 * k) * f._raw(z)
print(f"\nf(-1/z) = {lhs:.10e}")
print(f"z^12 f  = {rhs:.10e}   rel. diff {abs(lhs - rhs) / abs(rhs):.1e}")

# the pole: local coefficient at rho, against the divisor weight
p = cmath.exp(2j * math.pi / 3)
(pt, weight), = f.residue_divisor()
a = residue_at(f, p, k)
print(f"\nlocal coefficient at e(1/3): {a:.12f}")
print(f"divisor weight x w_Q (=3):   {3 * weight:.12f}")

# f is a multiple of the Petersson Poincare series with the same pole
eta = PeterssonEta(k, N, p)
for z in (complex(0.2, 1.5), complex(-0.3, 0.8)):
    print(f"f / eta_(6, rho) at {z}: {f(z) / eta(z):.12f}")
print(f"expected ratio (weight):     {weight:.12f}")
