"""Binary quadratic forms of level N, Heegner points and twisted Heegner divisors.

A form is stored as ``[A, b, c]`` with the level factor already inside the
leading coefficient (``N | A``), so ``Q(x, y) = A x^2 + b x y + c y^2``.
Group elements act on the right, ``(Q o g)(x, y) = Q(g00 x + g01 y, g10 x + g11 y)``,
which matches ``alpha_{Q o g} = g^{-1} alpha_Q``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import gcd, isqrt, sqrt

import numpy as np

from .arith import factorize, is_fundamental, kronecker

__all__ = [
    "HeegnerError",
    "QuadForm",
    "LatticeVector",
    "HeegnerDivisor",
    "gamma0_coset_reps",
    "in_gamma0",
    "reduce_form",
    "class_reps",
    "heegner_point",
    "stabilizer_order",
    "genus_char",
    "heegner_divisor",
    "are_gamma0_equivalent",
    "X_of_z",
    "U1_of_z",
    "U2_of_z",
]


class HeegnerError(ValueError):
    """Inconsistent Heegner parameters (congruence or sign violations)."""


Matrix = tuple[int, int, int, int]

IDENTITY: Matrix = (1, 0, 0, 1)


def mat_mul(g: Matrix, h: Matrix) -> Matrix:
    a, b, c, d = g
    e, f, x, y = h
    return (a * e + b * x, a * f + b * y, c * e + d * x, c * f + d * y)


def mat_inv(g: Matrix) -> Matrix:
    a, b, c, d = g
    return (d, -b, -c, a)


def mobius(g: Matrix, z: complex) -> complex:
    a, b, c, d = g
    return (a * z + b) / (c * z + d)


def in_gamma0(g: Matrix, N: int) -> bool:
    return g[2] % N == 0


@dataclass(frozen=True, order=True)
class QuadForm:
    """Integral binary quadratic form ``[a, b, c]`` of level ``N`` (``N | a``)."""

    a: int
    b: int
    c: int
    N: int = 1

    def __post_init__(self):
        if self.N < 1:
            raise HeegnerError("level N must be positive")
        if self.a % self.N:
            raise HeegnerError(f"leading coefficient {self.a} not divisible by N={self.N}")

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def sign(self) -> int:
        return 1 if self.a > 0 else -1

    @property
    def coeffs(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)

    def __call__(self, x, y=1):
        return self.a * x * x + self.b * x * y + self.c * y * y

    def __neg__(self) -> "QuadForm":
        return QuadForm(-self.a, -self.b, -self.c, self.N)

    def act(self, g: Matrix) -> "QuadForm":
        """Right action ``Q o g``; the result keeps level ``N`` only if ``g`` is in Gamma_0(N)."""
        p, q, r, s = g
        a, b, c = self.a, self.b, self.c
        A = a * p * p + b * p * r + c * r * r
        B = 2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s
        C = a * q * q + b * q * s + c * s * s
        if A % self.N:
            raise HeegnerError(f"matrix {g} does not preserve level {self.N}")
        return QuadForm(A, B, C, self.N)

    def to_list(self) -> list[int]:
        return [self.a, self.b, self.c]


def _act_raw(f: tuple[int, int, int], g: Matrix) -> tuple[int, int, int]:
    p, q, r, s = g
    a, b, c = f
    return (a * p * p + b * p * r + c * r * r,
            2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
            a * q * q + b * q * s + c * s * s)


def reduce_form(f: tuple[int, int, int]) -> tuple[tuple[int, int, int], Matrix]:
    """Gauss-reduce a positive definite form; returns ``(R, g)`` with ``f o g = R``."""
    a, b, c = f
    if b * b - 4 * a * c >= 0 or a <= 0:
        raise HeegnerError(f"form {f} is not positive definite")
    g = IDENTITY
    while True:
        if not (-a < b <= a):
            # translate: x -> x + t y
            t = (a - b) // (2 * a)
            step = (1, t, 0, 1)
            a, b, c = _act_raw((a, b, c), step)
            g = mat_mul(g, step)
            continue
        if a > c or (a == c and b < 0):
            step = (0, -1, 1, 0)
            a, b, c = _act_raw((a, b, c), step)
            g = mat_mul(g, step)
            continue
        break
    return (a, b, c), g


def _sl2_stabilizer(R: tuple[int, int, int]) -> list[Matrix]:
    # reduced forms are stabilised only by matrices with entries in {-1, 0, 1}
    out = []
    for g in product((-1, 0, 1), repeat=4):
        if g[0] * g[3] - g[1] * g[2] == 1 and _act_raw(R, g) == R:
            out.append(g)
    return out


def gamma0_coset_reps(N: int) -> list[Matrix]:
    """Representatives ``g`` of the right cosets ``Gamma_0(N) g`` in SL2(Z)."""
    if N == 1:
        return [IDENTITY]
    seen = []
    reps = []
    units = [u for u in range(1, N) if gcd(u, N) == 1] or [1]
    for c, d in product(range(N), repeat=2):
        if gcd(gcd(c, d), N) != 1:
            continue
        key = min(((u * c) % N, (u * d) % N) for u in units)
        if key in seen:
            continue
        seen.append(key)
        # lift (c, d) to a coprime pair
        cc, dd = c, d
        if cc == 0:
            cc = N
        while gcd(cc, dd) != 1:
            dd += N
        # complete to a matrix of determinant 1
        aa, bb = _complete_row(cc, dd)
        reps.append((aa, bb, cc, dd))
    return reps


def _complete_row(c: int, d: int) -> tuple[int, int]:
    # find a, b with a d - b c = 1
    def egcd(x, y):
        if y == 0:
            return (x, 1, 0)
        g, s, t = egcd(y, x % y)
        return (g, t, s - (x // y) * t)

    g, s, t = egcd(d, c)  # s d + t c = g
    if g == -1:
        s, t = -s, -t
    return s, -t


def are_gamma0_equivalent(Q1: QuadForm, Q2: QuadForm) -> bool:
    """Decide ``Q2 = Q1 o g`` for some ``g`` in Gamma_0(N) (positive definite forms)."""
    if Q1.N != Q2.N or Q1.disc != Q2.disc:
        return False
    R1, g1 = reduce_form(Q1.coeffs)
    R2, g2 = reduce_form(Q2.coeffs)
    if R1 != R2:
        return False
    inv2 = mat_inv(g2)
    for s in _sl2_stabilizer(R1):
        if in_gamma0(mat_mul(mat_mul(g1, s), inv2), Q1.N):
            return True
    return False


def _check_params(N: int, d: int, r: int):
    if (d - r * r) % (4 * N):
        raise HeegnerError(f"inconsistent Heegner parameters: d={d} is not congruent to r^2={r * r} mod 4N={4 * N}")


def _reduced_forms(d: int) -> list[tuple[int, int, int]]:
    out = []
    amax = isqrt(-d // 3) + 1
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            num = b * b - d
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            out.append((a, b, c))
    return out


def class_reps(N: int, d: int, r: int) -> list[QuadForm]:
    """One positive definite form per Gamma_0(N)-class in ``Q_{d,r}``, sorted by ``(a, b, c)``.

    Each chosen representative is the lexicographically smallest form with ``a > 0``
    met while translating the SL2(Z)-reduced forms through the cosets of Gamma_0(N).
    """
    if d >= 0:
        raise HeegnerError("class_reps needs a negative discriminant")
    _check_params(N, d, r)
    cosets = [mat_inv(g) for g in gamma0_coset_reps(N)]
    candidates = []
    for R in _reduced_forms(d):
        for h in cosets:
            A, B, C = _act_raw(R, h)
            if A % N or (B - r) % (2 * N):
                continue
            # normalise b into (-A, A] by translations in Gamma_0(N)
            Q = QuadForm(A, B, C, N)
            Q = _translate_normal(Q)
            candidates.append(Q)
    reps: list[QuadForm] = []
    for Q in sorted(set(candidates)):
        if not any(are_gamma0_equivalent(Q, P) for P in reps):
            reps.append(Q)
    return sorted(reps)


def _translate_normal(Q: QuadForm) -> QuadForm:
    # T^t lies in Gamma_0(N) for every t; bring b into (-A, A]
    A, b = Q.a, Q.b
    t = (A - b) // (2 * A)
    return Q.act((1, t, 0, 1))


def heegner_point(Q: QuadForm) -> complex:
    """Root of ``Q(z, 1)`` in the upper half-plane."""
    if Q.disc >= 0 or Q.a <= 0:
        raise HeegnerError(f"{Q} is not positive definite")
    return complex(-Q.b, sqrt(-Q.disc)) / (2 * Q.a)


def stabilizer_order(Q: QuadForm) -> int:
    """``w_Q``: half the order of the stabiliser of ``Q`` in Gamma_0(N)."""
    R, h = reduce_form(Q.coeffs)
    hinv = mat_inv(h)
    count = 0
    for s in _sl2_stabilizer(R):
        g = mat_mul(mat_mul(h, s), hinv)
        if in_gamma0(g, Q.N):
            count += 1
    return count // 2


@lru_cache(maxsize=8)
def _shell_order(bound: int) -> tuple[tuple[int, int], ...]:
    pts = [(x, y) for x in range(-bound, bound + 1) for y in range(-bound, bound + 1)]
    return tuple(sorted(pts, key=lambda p: (max(abs(p[0]), abs(p[1])), p)))


def genus_char(delta: int, Q: QuadForm, bound: int = 50) -> int:
    """Generalised genus character ``chi_delta(Q)`` in the Gross-Kohnen-Zagier normalisation.

    For ``Q = [aN, b, c]`` the value is ``(delta/n)`` for any ``n`` coprime to ``delta``
    represented by ``[a N1, b, c N2]`` for some splitting ``N = N1 N2``, and 0 when
    ``gcd(a, b, c, delta) > 1``.
    """
    delta = int(delta)
    if delta == 1:
        return 1
    if Q.disc % delta:
        raise HeegnerError(f"discriminant {Q.disc} of {Q} is not divisible by {delta}")
    N = Q.N
    a0 = Q.a // N
    if gcd(gcd(gcd(a0, Q.b), Q.c), delta) != 1:
        return 0
    splits = [(n1, N // n1) for n1 in range(1, N + 1) if N % n1 == 0]
    for x, y in _shell_order(bound):
        for n1, n2 in splits:
            n = a0 * n1 * x * x + Q.b * x * y + Q.c * n2 * y * y
            if n != 0 and gcd(n, delta) == 1:
                return kronecker(delta, n)
    raise HeegnerError(
        f"no value coprime to {delta} represented by {Q} with |x|, |y| <= {bound}; raise the bound")


@dataclass(frozen=True)
class LatticeVector:
    """Vector ``X = [[b/2N, c/N], [-a, -b/2N]]`` of the dual lattice ``L'``."""

    a: Fraction
    b: Fraction
    c: Fraction
    N: int = 1

    @classmethod
    def from_form(cls, Q: QuadForm) -> "LatticeVector":
        return cls(Fraction(Q.a, Q.N), Fraction(Q.b), Fraction(Q.c), Q.N)

    @property
    def matrix(self) -> np.ndarray:
        N = self.N
        return np.array([[float(self.b) / (2 * N), float(self.c) / N],
                         [-float(self.a), -float(self.b) / (2 * N)]])

    def exact_matrix(self) -> list[list[Fraction]]:
        N = self.N
        return [[self.b / (2 * N), self.c / N], [-self.a, -self.b / (2 * N)]]

    @property
    def q(self) -> Fraction:
        """``q(X) = -N det(X)``."""
        m = self.exact_matrix()
        return -self.N * (m[0][0] * m[1][1] - m[0][1] * m[1][0])

    @property
    def form(self) -> tuple[Fraction, Fraction, Fraction]:
        """``Q_X = [aN, b, c]``."""
        return (self.a * self.N, self.b, self.c)

    def __neg__(self) -> "LatticeVector":
        return LatticeVector(-self.a, -self.b, -self.c, self.N)

    def act(self, g: Matrix) -> "LatticeVector":
        """``g . X = g X g^{-1}``."""
        p, q, r, s = (Fraction(x) for x in g)
        m = self.exact_matrix()
        gi = (s, -q, -r, p)
        t = [[p * m[0][0] + q * m[1][0], p * m[0][1] + q * m[1][1]],
             [r * m[0][0] + s * m[1][0], r * m[0][1] + s * m[1][1]]]
        u = [[t[0][0] * gi[0] + t[0][1] * gi[2], t[0][0] * gi[1] + t[0][1] * gi[3]],
             [t[1][0] * gi[0] + t[1][1] * gi[2], t[1][0] * gi[1] + t[1][1] * gi[3]]]
        N = self.N
        return LatticeVector(-u[1][0], 2 * N * u[0][0], N * u[0][1], N)

    def Q_of_z(self, z: complex) -> complex:
        """``Q_X(z) = aN z^2 + b z + c``."""
        A, B, C = (float(x) for x in self.form)
        return A * z * z + B * z + C

    def p_z(self, z: complex) -> float:
        """``p_z(X) = -(X, X(z)) = (aN|z|^2 + b x + c) / (sqrt(2N) y)``."""
        A, B, C = (float(x) for x in self.form)
        x, y = z.real, z.imag
        return (A * abs(z) ** 2 + B * x + C) / (sqrt(2 * self.N) * y)

    def pair(self, Y: np.ndarray) -> float:
        """Bilinear form ``(X, Y) = N tr(XY)`` against a real 2x2 matrix."""
        return float(self.N * np.trace(self.matrix @ Y))


def X_of_z(z: complex, N: int = 1) -> np.ndarray:
    x, y = z.real, z.imag
    return np.array([[-x, abs(z) ** 2], [-1.0, x]]) / (sqrt(2 * N) * y)


def U1_of_z(z: complex, N: int = 1) -> np.ndarray:
    x, y = z.real, z.imag
    return np.array([[x, -x * x + y * y], [1.0, -x]]) / (sqrt(2 * N) * y)


def U2_of_z(z: complex, N: int = 1) -> np.ndarray:
    x, y = z.real, z.imag
    return np.array([[y, -2 * x * y], [0.0, -y]]) / (sqrt(2 * N) * y)


@dataclass(frozen=True)
class HeegnerDivisor:
    """Finite formal sum of Heegner points with weights ``chi_delta(Q)/w_Q``."""

    N: int
    delta: int
    rho: int
    D: int
    r: int
    k: int
    forms: tuple[QuadForm, ...] = ()
    weights: tuple[float, ...] = ()
    stabilizers: tuple[int, ...] = ()
    characters: tuple[int, ...] = ()

    @property
    def points(self) -> list[tuple[complex, float]]:
        return [(heegner_point(Q), w) for Q, w in zip(self.forms, self.weights)]

    @property
    def scale(self) -> float:
        """``|D delta|^((k-1)/2)``."""
        return abs(self.D * self.delta) ** ((self.k - 1) / 2)

    @property
    def scale_exponent(self) -> float:
        return (self.k - 1) / 2

    def __len__(self) -> int:
        return len(self.forms)

    def to_dict(self) -> dict:
        pts = []
        for Q, w in zip(self.forms, self.weights):
            z = heegner_point(Q)
            pts.append({"re": z.real, "im": z.imag, "weight": w, "form": Q.to_list()})
        return {"N": self.N, "Delta": self.delta, "rho": self.rho, "D": self.D, "r": self.r,
                "k": self.k, "scale": self.scale, "points": pts}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "HeegnerDivisor":
        """Rebuild from the JSON form; points are recomputed and checked against the stored ones."""
        div = heegner_divisor(int(d["N"]), int(d["Delta"]), int(d["rho"]), int(d["D"]),
                              int(d["r"]), int(d.get("k", 2)))
        stored = [tuple(p["form"]) for p in d.get("points", [])]
        if stored and stored != [Q.coeffs for Q in div.forms]:
            raise HeegnerError("stored divisor points do not match the recomputed class representatives")
        return div


def check_heegner_params(N: int, delta: int, rho: int, D: int, r: int):
    if not is_fundamental(delta):
        raise HeegnerError(f"Delta={delta} is not a fundamental discriminant")
    if (delta - rho * rho) % (4 * N):
        raise HeegnerError(f"Delta={delta} is not congruent to rho^2={rho * rho} mod 4N={4 * N}")
    if D >= 0:
        raise HeegnerError(f"D={D} must be negative")
    d = D * abs(delta)
    if (d - (r * rho) ** 2) % (4 * N):
        raise HeegnerError(
            f"D|Delta|={d} is not congruent to (r rho)^2={(r * rho) ** 2} mod 4N={4 * N}")
    # needed for the genus character to be well defined (D and Delta both discriminants)
    sg = 1 if delta > 0 else -1
    if (D - sg * r * r) % (4 * N):
        raise HeegnerError(f"D={D} is not congruent to sgn(Delta) r^2={sg * r * r} mod 4N={4 * N}")


def heegner_divisor(N: int, delta: int, rho: int, D: int, r: int, k: int = 2,
                    bound: int = 50) -> HeegnerDivisor:
    """Twisted Heegner divisor ``Z_{delta,rho}(D, r)`` with recorded rescaling ``|D delta|^((k-1)/2)``."""
    check_heegner_params(N, delta, rho, D, r)
    d = D * abs(delta)
    reps = class_reps(N, d, (r * rho) % (2 * N))
    ws = tuple(stabilizer_order(Q) for Q in reps)
    chis = tuple(genus_char(delta, Q, bound) for Q in reps)
    weights = tuple(chi / w for chi, w in zip(chis, ws))
    return HeegnerDivisor(N, delta, rho, D, r, k, tuple(reps), weights, ws, chis)
