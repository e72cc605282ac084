"""Integer arithmetic: Kronecker symbols, discriminants, square roots modulo 4N
and the twisted divisor-sum transform relating Maass and meromorphic coefficients.

Inputs are desk-scale, so factorisation is plain trial division.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Sequence

import numpy as np

__all__ = [
    "Discriminant",
    "factorize",
    "divisors",
    "moebius",
    "is_squarefree",
    "is_fundamental",
    "kronecker",
    "sqrt_mod_4N",
    "forward_divisor_sum",
    "invert_divisor_sum",
]


@lru_cache(maxsize=4096)
def _factor_cached(n: int) -> tuple[tuple[int, int], ...]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def factorize(n: int) -> dict[int, int]:
    """Prime factorisation of ``|n|`` as ``{p: e}`` (empty for 0 and +-1)."""
    n = abs(int(n))
    if n < 2:
        return {}
    return dict(_factor_cached(n))


def divisors(n: int) -> list[int]:
    """Positive divisors of ``n >= 1`` in increasing order."""
    n = int(n)
    if n < 1:
        raise ValueError("divisors() needs a positive integer")
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p**j for d in divs for j in range(e + 1)]
    return sorted(divs)


def moebius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorize(n).values())


def is_fundamental(d: int) -> bool:
    """True if ``d`` is a fundamental discriminant (1 counts as fundamental)."""
    d = int(d)
    if d == 1:
        return True
    if d == 0:
        return False
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


@dataclass(frozen=True)
class Discriminant:
    """An integer congruent to 0 or 1 mod 4, flagged if it is fundamental."""

    value: int
    is_fundamental: bool = False

    def __post_init__(self):
        if self.value % 4 not in (0, 1):
            raise ValueError(f"{self.value} is not a discriminant (must be 0 or 1 mod 4)")
        if self.is_fundamental and not is_fundamental(self.value):
            raise ValueError(f"{self.value} is not a fundamental discriminant")

    @classmethod
    def fundamental(cls, value: int) -> "Discriminant":
        return cls(int(value), True)

    @property
    def sign(self) -> int:
        return 1 if self.value > 0 else -1

    def __int__(self) -> int:
        return self.value


def _legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol ``(a/n)`` with the usual ``(a/2)`` and ``(a/-1)`` conventions."""
    a, n = int(a), int(n)
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    for p, e in factorize(n).items():
        if p == 2:
            if a % 2 == 0:
                return 0
            s = 1 if a % 8 in (1, 7) else -1
        else:
            s = _legendre(a, p)
            if s == 0:
                return 0
        if e % 2:
            result *= s
    return result


def sqrt_mod_4N(delta: int, N: int) -> list[int]:
    """All residues ``rho`` in ``0..2N-1`` with ``rho**2 == delta (mod 4N)``."""
    if N < 1:
        raise ValueError("N must be positive")
    M = 4 * N
    return [rho for rho in range(2 * N) if (rho * rho - delta) % M == 0]


def _is_exact(seq) -> bool:
    return all(isinstance(x, (int, Fraction)) and not isinstance(x, bool) for x in seq)


def forward_divisor_sum(a: Sequence[complex], k: int, delta: int) -> np.ndarray:
    """``b_n = n^(2k-1) sum_{d|n} (delta/d) d^(-k) a_{n/d}`` for ``n = 1..len(a)``.

    ``a[0]`` holds ``a_1``.  Integer or ``Fraction`` input is kept exact (object array).
    """
    exact = _is_exact(a)
    a = np.array(list(a), dtype=object) if exact else np.asarray(a, dtype=complex)
    n_max = len(a)
    b = np.zeros(n_max, dtype=object if exact else complex)
    for n in range(1, n_max + 1):
        acc = Fraction(0) if exact else 0j
        for d in divisors(n):
            chi = kronecker(delta, d)
            if chi:
                w = Fraction(chi, d**k) if exact else chi * d ** (-float(k))
                acc += w * a[n // d - 1]
        b[n - 1] = n ** (2 * k - 1) * acc
    return b


def invert_divisor_sum(b: Sequence[complex], k: int, delta: int) -> np.ndarray:
    """Invert :func:`forward_divisor_sum` via the Dirichlet inverse ``mu(d)(delta/d)d^-k``.

    The kernel values are exact rationals; only the ``b`` values are floating
    (exact throughout for integer or ``Fraction`` input).
    """
    exact = _is_exact(b)
    b = np.array(list(b), dtype=object) if exact else np.asarray(b, dtype=complex)
    n_max = len(b)
    a = np.zeros(n_max, dtype=object if exact else complex)
    for n in range(1, n_max + 1):
        acc = Fraction(0) if exact else 0j
        for d in divisors(n):
            mu = moebius(d)
            chi = kronecker(delta, d)
            if mu == 0 or chi == 0:
                continue
            m = n // d
            coeff = Fraction(mu * chi, d**k) / Fraction(m ** (2 * k - 1))
            acc += (coeff if exact else float(coeff)) * b[m - 1]
        a[n - 1] = acc
    return a


def squarefree_part(n: int) -> int:
    out = 1
    for p, e in factorize(n).items():
        if e % 2:
            out *= p
    return out if n > 0 else -out


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


def gcd_many(*xs: int) -> int:
    g = 0
    for x in xs:
        g = gcd(g, int(x))
    return g
