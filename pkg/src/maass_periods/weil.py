"""Weil representation of Mp2(Z) on C[Z/2NZ] and metaplectic bookkeeping.

An element of Mp2(Z) is a pair ``(M, phi)`` with ``phi(tau)^2 = c tau + d``.
We store ``phi`` as a sign times the principal branch of ``sqrt(c tau + d)``;
products are resolved by evaluating both sides at a fixed test point, which
is legitimate because the ratio of two holomorphic square roots of the same
nonvanishing function on H is a constant sign.

The sign convention for ``rho(-I)`` is the one forced by ``Z = S^2``:
``rho_L(Z) e_r = -i e_{-r}`` (conjugated in the dual representation).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["MetaplecticElement", "WeilRep", "T_ELT", "S_ELT", "word_decomposition", "reduce_to_fundamental"]

_TEST_POINT = complex(0.1234, 1.1719)


def _principal_sqrt(w: complex) -> complex:
    # +0j keeps negative reals on the upper side of the cut: sqrt(-1) = i
    return cmath.sqrt(complex(w.real, w.imag + 0.0))


@dataclass(frozen=True)
class MetaplecticElement:
    a: int
    b: int
    c: int
    d: int
    branch: int = 1

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"({self.a},{self.b};{self.c},{self.d}) is not in SL2(Z)")
        if self.branch not in (1, -1):
            raise ValueError("branch must be +1 or -1")

    @property
    def matrix(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def phi(self, tau: complex) -> complex:
        return self.branch * _principal_sqrt(self.c * tau + self.d)

    def act(self, tau: complex) -> complex:
        return (self.a * tau + self.b) / (self.c * tau + self.d)

    def __mul__(self, other: "MetaplecticElement") -> "MetaplecticElement":
        a, b, c, d = self.matrix
        e, f, g, h = other.matrix
        M = (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
        t = _TEST_POINT
        val = self.phi(other.act(t)) * other.phi(t)
        ref = _principal_sqrt(M[2] * t + M[3])
        sign = 1 if (val / ref).real > 0 else -1
        return MetaplecticElement(*M, branch=sign)

    def inverse(self) -> "MetaplecticElement":
        a, b, c, d = self.matrix
        cand = MetaplecticElement(d, -b, -c, a, 1)
        prod = self * cand
        return cand if prod.branch == 1 else MetaplecticElement(d, -b, -c, a, -1)

    def __neg__(self) -> "MetaplecticElement":
        return MetaplecticElement(self.a, self.b, self.c, self.d, -self.branch)


T_ELT = MetaplecticElement(1, 1, 0, 1, 1)
S_ELT = MetaplecticElement(0, -1, 1, 0, 1)
Z_ELT = S_ELT * S_ELT


def word_decomposition(a: int, b: int, c: int, d: int) -> list[tuple[str, int]]:
    """Write ``(a b; c d)`` as a word ``T^q1 S T^q2 S ... (+-T^n)`` by continued fractions.

    Returns a list of ``("T", n)``, ``("S", 1)`` and possibly ``("Z", 1)`` tokens, where
    ``Z`` stands for ``-I = S^2``.  Only the matrix is matched, not the branch.
    """
    word = []
    while c != 0:
        q = round(a / c)
        word.append(("T", q))
        word.append(("S", 1))
        # M' = S^{-1} T^{-q} M
        a, b, c, d = c, d, -(a - q * c), -(b - q * d)
    if a == 1:
        word.append(("T", b))
    else:
        word.append(("Z", 1))
        word.append(("T", -b))
    return word


class WeilRep:
    """Weil representation ``rho_L`` (or its dual) for ``L'/L = Z/2NZ`` with ``x^2/4N``."""

    def __init__(self, N: int, dual: bool = False):
        if N < 1:
            raise ValueError("N must be positive")
        self.N = int(N)
        self.dual = bool(dual)
        self.sigma = -1 if dual else 1
        n = 2 * self.N
        r = np.arange(n)
        self.T = np.diag(np.exp(2j * np.pi * self.sigma * r * r / (4 * self.N)))
        self.S = (np.exp(-2j * np.pi * self.sigma / 8) / np.sqrt(n)
                  * np.exp(-2j * np.pi * self.sigma * np.outer(r, r) / n))
        self.Z = self.S @ self.S
        self._cache: dict = {}

    @property
    def dim(self) -> int:
        return 2 * self.N

    def __repr__(self):
        return f"WeilRep(N={self.N}, dual={self.dual})"

    def T_power(self, n: int) -> np.ndarray:
        r = np.arange(self.dim)
        return np.diag(np.exp(2j * np.pi * self.sigma * n * r * r / (4 * self.N)))

    def matrix(self, g: MetaplecticElement) -> np.ndarray:
        """``rho(g)``; column ``r`` is the image of ``e_r``."""
        key = (g.a, g.b, g.c, g.d, g.branch)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        acc_elt = MetaplecticElement(1, 0, 0, 1, 1)
        acc = np.eye(self.dim, dtype=complex)
        for tok, n in word_decomposition(g.a, g.b, g.c, g.d):
            if tok == "T":
                elt = MetaplecticElement(1, n, 0, 1, 1)
                mat = self.T_power(n)
            elif tok == "S":
                elt, mat = S_ELT, self.S
            else:
                elt, mat = Z_ELT, self.Z
            acc_elt = acc_elt * elt
            acc = acc @ mat
        if acc_elt.matrix != g.matrix:
            raise AssertionError("word decomposition failed")
        if acc_elt.branch != g.branch:
            # (M, -phi) = (M, phi) Z^2 and rho(Z^2) = -1
            acc = -acc
        if len(self._cache) < 200000:
            self._cache[key] = acc
        return acc

    def principal(self, a: int, b: int, c: int, d: int) -> np.ndarray:
        """``rho`` of the lift with the principal branch of ``sqrt(c tau + d)``."""
        return self.matrix(MetaplecticElement(a, b, c, d, 1))

    def Z_sign(self) -> complex:
        """Scalar ``z`` with ``rho(Z)^{-1} e_r = z e_{-r}``."""
        return 1j if not self.dual else -1j

    def symmetric_vector(self, r: int, kappa: float) -> np.ndarray:
        """``e_r + eps e_{-r}`` with ``eps = i^{-2 kappa} z``; this is the average of the
        Poincare seed over ``+-I``.  Equals ``(-1)^{kappa-1/2}`` for ``rho_L`` and
        ``-(-1)^{kappa-1/2}`` for the dual."""
        v = np.zeros(self.dim, dtype=complex)
        eps = np.exp(-1j * np.pi * kappa) * self.Z_sign()
        v[r % self.dim] += 1
        v[(-r) % self.dim] += eps
        return v


def reduce_to_fundamental(tau: complex, max_steps: int = 10000):
    """Return ``(g, tau_F)`` with ``g tau = tau_F`` in the standard fundamental domain."""
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half-plane")
    g = (1, 0, 0, 1)
    for _ in range(max_steps):
        n = round(tau.real)
        if n:
            tau -= n
            a, b, c, d = g
            g = (a - n * c, b - n * d, c, d)
        if abs(tau) < 1 - 1e-15:
            tau = -1 / tau
            a, b, c, d = g
            g = (-c, -d, a, b)
        else:
            return g, tau
    raise RuntimeError("reduction did not terminate")
