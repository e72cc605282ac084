"""The normalised form zeta and rationality of its coefficients (takes about half a minute).

zeta = eta - C i pi^k sqrt(Delta) c+(3, 1) Delta kills the first coefficient of eta
using the weight-12 cusp form.  The remaining coefficients divided by
C i pi^k sqrt(Delta) are rational numbers; they are recognised from their continued
fractions, with the Fourier error estimate as the noise level.
"""

from maass_periods.acceptance import Context, DELTA, K, RHO
from maass_periods.algrec import hecke_recursion_check, recognize_rational, transcendental_factor
from maass_periods.merom import zeta_normalize

ctx = Context()
c_top = ctx.table.cplus(abs(DELTA), RHO).real
fac = transcendental_factor(K, DELTA)
zeta = zeta_normalize(ctx.series, ctx.G, K, DELTA, c_top)

print(f"c+(3, 1) = {c_top:.15f}")
print(" n   zeta_n / (C i pi^k sqrt(Delta))      error       recognised")
for n in range(1, 5):
    val = zeta[n] / fac
    err = zeta.error_estimates[n] / abs(fac)
    rec = recognize_rational(val, 10**6, 1e-9, error=err)
    print(f"{n:2d}  {val.real: .10f}{val.imag:+.1e}j  {err:.1e}   {rec.candidate}")

# the same numbers from the coefficient table alone, through the Hecke recursion
report = hecke_recursion_check(ctx.table, {n: ctx.G[n - 1] for n in range(1, 5)}, K, DELTA, RHO, 4)
print("\ntable route:", [(row["n"], row["candidate"]) for row in report["rows"]])
