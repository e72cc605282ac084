"""Algebraicity diagnostics for Fourier coefficients and cycle integrals.

Coefficients of the canonical forms are expected in ``C i pi^k sqrt(Delta) F``
with ``C = C_{k,Delta}``; for rational ``F`` this is tested by dividing out the
transcendental factor and recognising the quotient by continued fractions.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .arith import divisors, kronecker
from .cycles import GeodesicCycle, pairing
from .merom import C_k_delta, sqrt_delta

__all__ = [
    "RecognitionResult",
    "normalize_coefficient",
    "transcendental_factor",
    "recognize_rational",
    "PeriodCheck",
    "period_formula_check",
    "hecke_recursion_check",
]


def transcendental_factor(k: int, delta: int) -> complex:
    """``C_{k,Delta} i pi^k sqrt(Delta)``."""
    return float(C_k_delta(k, delta)) * 1j * math.pi ** k * sqrt_delta(delta)


def normalize_coefficient(b: complex, k: int, delta: int) -> complex:
    return complex(b) / transcendental_factor(k, delta)


@dataclass
class RecognitionResult:
    value: float
    candidate: Fraction | None
    denominator_bound: int
    residual: float
    imag_residual: float = 0.0

    @property
    def recognized(self) -> bool:
        return self.candidate is not None

    def to_dict(self) -> dict:
        return {"value": self.value,
                "candidate": None if self.candidate is None else str(self.candidate),
                "denominator_bound": self.denominator_bound, "residual": self.residual,
                "imag_residual": self.imag_residual}


def _convergents(x: float, max_den: int, max_steps: int = 64):
    """Continued-fraction convergents of ``x`` with denominator at most ``max_den``."""
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    frac = Fraction(x)  # exact binary value, so the expansion terminates
    for _ in range(max_steps):
        a = math.floor(frac)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > max_den:
            return
        yield Fraction(h1, k1)
        rest = frac - a
        if rest == 0:
            return
        frac = 1 / rest


def recognize_rational(x, max_den: int = 10**6, rtol: float = 1e-6,
                       improvement: float | None = 1e3, error: float = 0.0) -> RecognitionResult:
    """Smallest-denominator convergent ``p/q`` (``q <= max_den``) with ``|x - p/q| <= rtol max(1, |x|)``.

    Convergents of equal denominator are ordered by residual.  A candidate is
    vetoed if a later one shrinks the residual by more than ``improvement``,
    unless its residual is already within ``3 error`` (the known uncertainty of
    ``x``): below that level a better fit only tracks the noise.  Complex input
    must be real up to the same tolerance.
    """
    if max_den < 1:
        raise ValueError("max_den must be at least 1")
    z = complex(x)
    xr = z.real
    imag = abs(z.imag)
    tol = rtol * max(1.0, abs(xr))
    if not math.isfinite(xr) or imag > tol:
        return RecognitionResult(xr, None, max_den, math.inf, imag)
    convs = list(_convergents(xr, max_den))
    res = [abs(xr - float(c)) for c in convs]
    order = sorted(range(len(convs)), key=lambda i: (convs[i].denominator, res[i]))
    best = None
    for pos, i in enumerate(order):
        r = res[i]
        if r > tol:
            continue
        later = [res[j] for j in order[pos + 1:]]
        if improvement and r > 3 * error and later and min(later) * improvement < r:
            continue
        best = i
        break
    if best is None:
        r = min(res) if res else math.inf
        return RecognitionResult(xr, None, max_den, r, imag)
    return RecognitionResult(xr, convs[best], max_den, res[best], imag)


@dataclass
class PeriodCheck:
    lhs: float
    rhs: float
    rhs_alt: complex
    residual: float
    zeta_pairing: float
    G_pairing: float
    error: float
    matching_normalization: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rhs_alt"] = [self.rhs_alt.real, self.rhs_alt.imag]
        return d


def period_formula_check(zeta, G, cycle: GeodesicCycle, k: int, delta: int, divisor, c_top: float,
                         rtol: float = 1e-12, g_threshold: float = 1e-8) -> PeriodCheck:
    """Both sides of ``c_top = -(zeta, C) / (C_{k,Delta} i pi^k sqrt(Delta) (G, C))``.

    ``zeta`` and ``G`` are evaluators.  The alternative normalization with
    ``pi i^k`` in place of ``i pi^k`` is reported as ``rhs_alt``; the name of the
    normalization that reproduces ``c_top`` is returned.
    """
    pz = pairing(zeta, cycle, k, divisor, rtol)
    pg = pairing(G, cycle, k, None, rtol)
    if abs(pg.value) <= g_threshold * max(pg.scale, 1e-300):
        raise ValueError(f"(G, C) = {pg.value} is negligible on this cycle; choose another cycle")
    fac = transcendental_factor(k, delta)
    fac_alt = float(C_k_delta(k, delta)) * math.pi * 1j ** k * sqrt_delta(delta)
    rhs = -pz.value / (fac * pg.value)
    rhs_alt = -pz.value / (fac_alt * pg.value)
    if abs(rhs.imag) > 1e-8 * max(abs(rhs), 1e-300):
        raise ValueError("the normalization factor is not real for this (k, Delta)")
    err = abs(rhs) * (pz.error / max(abs(pz.value), 1e-300) + pg.error / abs(pg.value))
    r_main = abs(rhs.real - c_top)
    r_alt = abs(rhs_alt - c_top)
    which = "i*pi^k" if r_main <= r_alt else "pi*i^k"
    return PeriodCheck(float(c_top), float(rhs.real), complex(rhs_alt), float(r_main / max(abs(c_top), 1e-300)),
                       pz.value, pg.value, float(err), which)


def hecke_recursion_check(table, G_eigenvalues: dict, k: int, delta: int, rho: int, n_max: int,
                          max_den: int = 1000, rtol: float = 1e-11) -> dict:
    """Rationality of ``r_n = n^(2k-1) sum_{d|n} (Delta/d) d^-k c+(|Delta| n^2/d^2, rho n/d) - lambda_n c+(|Delta|, rho)``.

    ``r_n`` is the ``n``-th normalized coefficient of ``eta`` minus the multiple of
    ``G`` that removes the first coefficient, so rationality of every ``r_m``,
    ``m <= n`` expresses ``c+(n^2|Delta|, n rho)`` through lower coefficients
    and rationals.  Returns a JSON-ready report.
    """
    N = table.N
    top = table.cplus(abs(delta), rho % (2 * N)).real
    rows = []
    ok = True
    for n in range(1, n_max + 1):
        if n not in G_eigenvalues:
            raise KeyError(f"eigenvalue lambda_{n} missing")
        acc = 0.0
        for d in divisors(n):
            chi = kronecker(delta, d)
            if chi:
                m = n // d
                acc += chi * d ** (-float(k)) * table.cplus(abs(delta) * m * m, (rho * m) % (2 * N)).real
        rem = n ** (2 * k - 1) * acc - float(Fraction(G_eigenvalues[n])) * top
        # table entries are only known to about rtol, so fits below that level are not vetoed
        rec = recognize_rational(rem, max_den, rtol, error=rtol * max(1.0, abs(rem))) if n > 1 else RecognitionResult(rem, Fraction(0), max_den, abs(rem))
        passed = rec.recognized
        ok = ok and passed
        rows.append({"n": n, "remainder": rem, "candidate": None if rec.candidate is None else str(rec.candidate),
                     "residual": rec.residual, "pass": passed})
    first_fail = next((r["n"] for r in rows if not r["pass"]), None)
    return {"k": k, "delta": delta, "rho": rho, "pass": ok, "first_failure": first_fail, "rows": rows}


def report_json(obj, **kw) -> str:
    def default(o):
        if isinstance(o, Fraction):
            return str(o)
        if isinstance(o, complex):
            return [o.real, o.imag]
        if isinstance(o, np.generic):
            return o.item()
        raise TypeError(type(o))
    return json.dumps(obj, default=default, **kw)
