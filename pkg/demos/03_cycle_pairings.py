"""Cycle pairings: vanishing for canonical forms, path dependence only in the imaginary part.

eta_{2,i} is the level-1 canonical form of weight 4 with a pole on the orbit of i
(a closed form E4 Delta / E6^2 is used).  Its pairing with any closed geodesic
vanishes.  Moving the integration path across a pole changes the raw integral by a
residue term that is purely imaginary after projection, so the pairing (real part)
is unaffected.
"""

from maass_periods.cycles import cycle_from_matrix, pairing, path_independence_check
from maass_periods.merom import EtaTwoAtI, QExpansionForm, ramanujan_delta_coeffs

eta = EtaTwoAtI()
poles = ([1j], 1)

print("gamma          d   pairing        |projected integral|")
for g in [(2, 1, 1, 1), (3, 1, 2, 1), (5, 2, 2, 1), (7, 3, 2, 1)]:
    c = cycle_from_matrix(g)
    res = pairing(eta, c, 2, poles)
    print(f"{str(g):13s} {c.d_gamma:3d}  {res.value: .3e}     {res.magnitude:.3e}")

c = cycle_from_matrix((3, 1, 2, 1))
r1, r2, predicted = path_independence_check(eta, c, 2, poles, cycle2=c.with_waypoints([1.2 + 1.5j]),
                                            residues={1j: 2.0})
print("\npath 1 (straight):", r1.projected)
print("path 2 (over 1+i):", r2.projected)
print("jump:              ", r1.projected - r2.projected)
print("residue prediction:", predicted)

# for comparison: a cusp form has a genuinely nonzero, path-independent period
G = QExpansionForm(ramanujan_delta_coeffs(30), 6)
a = pairing(G, c, 6).projected
b = pairing(G, c.with_waypoints([0.3 + 1.8j]), 6).projected
print(f"\nDelta: projected period {a:.12e}, other path {b:.12e}")
print("the real part vanishes: for even k the cycle integrals of a real form project to i R")
