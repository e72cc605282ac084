"""Meromorphic modular forms of weight 2k attached to Heegner divisors.

Evaluators
    ``FormSum``      f_{k,D,r,Delta,rho}: signed, genus-character weighted sum of Q(z,1)^-k
    ``PeterssonEta`` eta_{k,varrho}: Petersson's two-variable Poincare series
    ``EtaTwoAtI``    closed form of eta_{2,i} at level 1 (E4 Delta / E6^2, rescaled)

Both series are organised by translation classes: forms (or orbit points)
related by ``z -> z + 1`` are summed together by :func:`translate_sum`.  The
outer sum (over leading coefficients, resp. coset rows) is truncated by an
explicit tail bound.  At level 1 the argument is first moved into the standard
fundamental domain.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd

import numpy as np
from numpy.polynomial import polynomial as npoly

from .arith import divisors, kronecker
from .qf import (HeegnerDivisor, QuadForm, _complete_row, check_heegner_params, genus_char, heegner_divisor,
                 mat_mul)
from .specfun import DEFAULT, ConvergenceError, PrecisionConfig
from .parallel import pmap
from .weil import reduce_to_fundamental

__all__ = [
    "PoleError",
    "MeromFormSpec",
    "FourierSeries2k",
    "translate_sum",
    "FormSum",
    "PeterssonEta",
    "EtaCombination",
    "EtaTwoAtI",
    "QExpansionForm",
    "eval_fkD",
    "eval_petersson_eta",
    "fourier_coeffs",
    "C_k_delta",
    "sqrt_delta",
    "predicted_coeffs",
    "eta_for_f",
    "residue_at",
    "hecke_scalar",
    "ramanujan_delta_coeffs",
    "eisenstein_coeffs",
    "load_qexp",
    "zeta_normalize",
]


class PoleError(ValueError):
    """Evaluation point too close to a pole."""

    def __init__(self, msg, form=None):
        super().__init__(msg)
        self.form = form


# ---------------------------------------------------------------------------
# sums over integer translates


@lru_cache(maxsize=64)
def _cot_poly(j: int) -> np.ndarray:
    """Coefficients of ``d^{j-1}/dx^{j-1} [pi cot(pi x)]`` as a polynomial in ``c = cot(pi x)``."""
    p = np.array([0.0, math.pi])
    for _ in range(j - 1):
        p = npoly.polymul(npoly.polyder(p), [-math.pi, 0.0, -math.pi])
    return p


def _S(j: int, x: np.ndarray) -> np.ndarray:
    """``sum_t (x + t)^(-j)`` (symmetric summation for ``j = 1``); ``x`` off the real line."""
    x = np.asarray(x, dtype=complex)
    out = np.empty_like(x)
    up = x.imag >= 0.2
    dn = x.imag <= -0.2
    mid = ~(up | dn)
    for mask, sgn in ((up, 1), (dn, -1)):
        if not mask.any():
            continue
        xs = sgn * x[mask]
        q = np.exp(2j * math.pi * xs)
        aq = np.abs(q).max()
        # n^(j-1) |q|^n below 1e-18 of the first term
        nmax = 1
        while nmax ** (j - 1) * aq ** (nmax - 1) > 1e-18 and nmax < 4000:
            nmax += 1
        n = np.arange(1, nmax + 1)
        acc = (n[:, None] ** (j - 1.0) * q[None, :] ** n[:, None]).sum(axis=0)
        val = (-2j * math.pi) ** j / math.factorial(j - 1) * acc
        if j == 1:
            val = val - 1j * math.pi
        out[mask] = val if sgn == 1 else (-1) ** j * val
    if mid.any():
        xm = x[mid]
        if np.any(np.abs(xm - np.round(xm.real)) < 1e-12):
            raise PoleError("translate sum evaluated at a pole")
        c = np.cos(math.pi * xm) / np.sin(math.pi * xm)
        out[mid] = (-1) ** (j - 1) / math.factorial(j - 1) * npoly.polyval(c, _cot_poly(j))
    return out


def _binom_neg(k: int, m: int) -> float:
    """``binom(-k, m)``."""
    return (-1) ** m * math.comb(k + m - 1, m)


def translate_sum(z: complex, alpha, k: int, eps: float = 1e-17) -> np.ndarray:
    """``G(z) = sum_t ((z + t - alpha)(z + t - conj(alpha)))^(-k)`` for an array of ``alpha`` in H.

    ``k >= 4``: a window of translates around the nearest one, sized by the
    tail ``2 (T - 1/2)^(1-2k) / (2k - 1)``.  ``k <= 3``: partial fractions
    through :func:`_S` when ``Im(alpha)`` is comparable to ``Im(z)``, else the
    expansion in ``Im(alpha)^2`` around the real part.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    y = z.imag
    if k >= 4:
        ya = alpha.imag
        ref = (0.25 + (y + ya.max()) ** 2) ** (-k)
        T = 2
        while 2 * (T - 0.5) ** (1 - 2 * k) / (2 * k - 1) > eps * ref:
            T = int(T * 1.3) + 1
        shift = -np.round((z - alpha).real)
        t = np.arange(-T, T + 1)
        w = (z - alpha + shift)[:, None] + t[None, :]
        wb = (z - alpha.conj() + shift)[:, None] + t[None, :]
        return ((w * wb) ** (-k)).sum(axis=1)
    out = np.empty(alpha.shape, dtype=complex)
    close = alpha.imag >= y / 3
    if close.any():
        a = alpha[close]
        delta = a - a.conj()
        acc = np.zeros(a.shape, dtype=complex)
        for j in range(1, k + 1):
            coef = _binom_neg(k, k - j)
            acc += coef * delta ** (j - 2 * k) * _S(j, z - a)
            acc += coef * (-delta) ** (j - 2 * k) * _S(j, z - a.conj())
        out[close] = acc
    far = ~close
    if far.any():
        a = alpha[far]
        w = z - a.real
        ya2 = a.imag ** 2
        acc = _S(2 * k, w)
        m = 1
        while True:
            term = _binom_neg(k, m) * ya2 ** m * _S(2 * k + 2 * m, w)
            acc = acc + term
            if np.all(np.abs(term) <= 1e-17 * np.abs(acc)) or m > 200:
                break
            m += 1
        out[far] = acc
    return out


def _translate_bound(y: float, k: int) -> float:
    """Upper bound for ``sum_t |z + t - a|^-2k`` over real ``a`` when ``Im z >= y``."""
    return y ** (-2 * k) * (2 + y * math.sqrt(math.pi) * math.gamma(k - 0.5) / math.gamma(k))


def _cusp_translate_bound(y: float, k: int, ya: float) -> float:
    """Bound for ``|sum_t ((z + t - a)(z + t - conj a))^-k|`` with ``Im z = y`` and ``Im a <= ya < y``.

    Expands in ``Im(a)^2`` around the real part and bounds each
    ``sum_t (w + t)^-j`` through its q-expansion; decays like ``exp(-2 pi y)``.
    """
    q = math.exp(-2 * math.pi * y)
    total = 0.0
    for m in range(64):
        j = 2 * k + 2 * m
        n = np.arange(1, 60 + int(j / (2 * math.pi * y)) * 4)
        logs = (j - 1) * np.log(n) + n * math.log(q) + j * math.log(2 * math.pi) - math.lgamma(j)
        term = math.comb(k + m - 1, m) * ya ** (2 * m) * float(np.exp(logs).sum())
        total += term
        if term <= 1e-3 * total:
            break
    return total


# ---------------------------------------------------------------------------
# f_{k,D,r,Delta,rho}


_GROW_LOCK = threading.RLock()


@dataclass
class _ClassTable:
    """Translation classes ``[A, B0 mod 2|A|]`` of forms in ``Q_{d, b}``, with ``|A| <= N * amax``."""

    N: int
    d: int
    b: int
    delta: int
    amax: int = 0
    A: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    B: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    weight: np.ndarray = field(default_factory=lambda: np.zeros(0))
    counts: list = field(default_factory=list)

    def grow(self, amax: int):
        if amax <= self.amax:
            return
        with _GROW_LOCK:
            self._grow(amax)

    def _grow(self, amax: int):
        if amax <= self.amax:
            return
        As, Bs, Ws = [], [], []
        N, d = self.N, self.d
        for a in range(self.amax + 1, amax + 1):
            A = a * N
            n_here = 0
            # a > 0: b = b0 mod 2N; a < 0: -Q with Q positive and b = -b0 mod 2N
            for s, b0 in ((1, self.b), (-1, -self.b)):
                cand = b0 % (2 * N) + 2 * N * np.arange(a)
                cand = cand[(cand * cand - d) % (4 * A) == 0]
                n_here += cand.size
                for B in cand:
                    B = int(B)
                    C = (B * B - d) // (4 * A)
                    chi = genus_char(self.delta, QuadForm(s * A, s * B, s * C, N))
                    if chi:
                        As.append(s * A)
                        Bs.append(s * B)
                        Ws.append(s * chi)
            self.counts.append(n_here)
        self.A = np.concatenate([self.A, np.array(As, dtype=np.int64)])
        self.B = np.concatenate([self.B, np.array(Bs, dtype=np.int64)])
        self.weight = np.concatenate([self.weight, np.array(Ws, dtype=float)])
        self.amax = amax

    def mean_count(self, amax: int) -> float:
        """Largest running average of the number of classes per ``a`` (both signs), ``a <= amax``."""
        counts = self.counts[:amax]
        c = np.cumsum(counts) / np.arange(1, len(counts) + 1)
        return float(max(c.max(), 1.0))


@lru_cache(maxsize=32)
def _class_table(N: int, d: int, b: int, delta: int) -> _ClassTable:
    return _ClassTable(N, d, b, delta)


class FormSum:
    """``f_{k,D,r,Delta,rho}(z) = i^k |D Delta|^(k-1/2) sum_Q sgn(Q) chi(Q) Q(z,1)^-k``.

    The sum runs over all forms (both signs) of discriminant ``D|Delta|`` with
    ``b = r rho mod 2N``.  ``last_error`` holds the tail bound of the last call.
    """

    def __init__(self, k: int, N: int, D: int, r: int, delta: int, rho: int, cfg: PrecisionConfig = DEFAULT):
        if k < 2:
            raise ValueError("weight parameter k must be at least 2")
        check_heegner_params(N, delta, rho, D, r)
        self.k, self.N, self.D, self.r, self.delta, self.rho = int(k), int(N), int(D), int(r), int(delta), int(rho)
        self.d = D * abs(delta)
        self.cfg = cfg
        self.prefactor = 1j ** k * abs(D * delta) ** (k - 0.5)
        self.table = _class_table(N, self.d, (r * rho) % (2 * N), delta)
        self.last_error = 0.0
        # highest Heegner point over the whole orbit
        self.pole_height = math.sqrt(abs(self.d)) / (2 * N)

    @property
    def degenerate(self) -> bool:
        """True when the terms for ``Q`` and ``-Q`` cancel identically (N = 1, (-1)^k Delta > 0)."""
        return self.N == 1 and (-1) ** self.k * self.delta > 0

    def __call__(self, z: complex) -> complex:
        z = complex(z)
        if z.imag <= 0:
            raise ValueError("z must lie in the upper half-plane")
        if self.N == 1:
            (a, b, c, d), zf = reduce_to_fundamental(z)
            return complex((c * z + d) ** (-2 * self.k) * self._raw(zf))
        return self._raw(z)

    def _raw(self, z: complex) -> complex:
        k, N = self.k, self.N
        y = z.imag
        sq = math.sqrt(abs(self.d))
        total = 0j
        absum = 0.0
        done = 0
        amax = max(4, int(math.ceil(sq / (2 * N * y))) + 2)
        tol = self.cfg.target_rel_error
        while True:
            if amax > self.cfg.max_terms:
                raise ConvergenceError(f"form sum needs |a| > {self.cfg.max_terms}", estimate=total,
                                       error=self.last_error)
            self.table.grow(amax)
            with _GROW_LOCK:
                A, B, W = self.table.A, self.table.B, self.table.weight
            # entries are stored by increasing |a|; use exactly those with |a| <= N amax
            hi = int(np.searchsorted(np.abs(A), N * amax, side="right"))
            A_, B_, W_ = A[done:hi], B[done:hi], W[done:hi]
            if A_.size:
                alpha = (-B_ + 1j * sq * np.sign(A_)) / (2 * A_)
                self._check_poles(z, alpha, A_, B_)
                G = translate_sum(z, alpha, k)
                terms = W_ * G / A_.astype(float) ** k
                total += np.sum(terms)
                absum += float(np.abs(terms).sum())
            done = hi
            # classes with |a| > amax sit at Im(alpha) <= sq / (2 N amax); their real parts
            # equidistribute, so per |a| the translate sums average to count * int |z - x|^-2k dx
            yq = max(y - sq / (2 * N * amax), y / 2)
            avg = yq ** (1 - 2 * k) * math.sqrt(math.pi) * math.gamma(k - 0.5) / math.gamma(k)
            tail = 2 * self.table.mean_count(amax) * N ** (-k) * amax ** (1 - k) / (k - 1) * avg
            self.last_error = abs(self.prefactor) * tail
            # relative to the size of the terms, so that zeros of f do not stall the loop
            if tail <= tol * max(abs(total), 1e-3 * absum) or (total == 0 and self.degenerate):
                return self.prefactor * total
            amax = int(amax * 1.6) + 1

    def _check_poles(self, z, alpha, A, B):
        dist = np.abs(((z - alpha).real + 0.5) % 1 - 0.5 + 1j * (z - alpha).imag)
        near = dist < 1e-3 * alpha.imag
        if near.any():
            i = int(np.argmax(near))
            C = (int(B[i]) ** 2 - self.d) // (4 * int(A[i]))
            raise PoleError(f"z={z} is within the exclusion radius of the Heegner point of "
                            f"[{int(A[i])}, {int(B[i])}, {C}]", form=(int(A[i]), int(B[i]), C))

    def heegner_divisor(self) -> HeegnerDivisor:
        return heegner_divisor(self.N, self.delta, self.rho, self.D, self.r, self.k)

    def residue_divisor(self) -> list[tuple[complex, float]]:
        """Points (one per class of positive forms in either residue ``+-r rho``) with local
        coefficients ``a`` predicted from the form sum; each point carries ``a / w``."""
        out = []
        scale = abs(self.D * self.delta) ** ((self.k - 1) / 2)
        sgn_neg = (-1) ** (self.k + 1)
        div_p = heegner_divisor(self.N, self.delta, self.rho, self.D, self.r, self.k)
        for Q, w, chi in zip(div_p.forms, div_p.stabilizers, div_p.characters):
            out.append((complex(-Q.b, math.sqrt(-Q.disc)) / (2 * Q.a), Q, w, scale * chi))
        # negative forms -Q with b = r rho come from positive forms with b = -r rho
        div_m = heegner_divisor(self.N, self.delta, self.rho, self.D, (-self.r) % (2 * self.N), self.k)
        for Q, w in zip(div_m.forms, div_m.stabilizers):
            chi = genus_char(self.delta, -Q)
            out.append((complex(-Q.b, math.sqrt(-Q.disc)) / (2 * Q.a), Q, w, scale * sgn_neg * chi))
        merged: dict = {}
        for z, Q, w, a in out:
            key = (Q.a, Q.b, Q.c)
            if key in merged:
                merged[key] = (z, w, merged[key][2] + a)
            else:
                merged[key] = (z, w, a)
        return [(z, a / w) for z, w, a in merged.values() if a != 0]


def eval_fkD(k: int, N: int, D: int, r: int, delta: int, rho: int, z: complex,
             trunc: PrecisionConfig = DEFAULT) -> complex:
    return FormSum(k, N, D, r, delta, rho, trunc)(z)


# ---------------------------------------------------------------------------
# Petersson Poincare series


class PeterssonEta:
    """``eta_{k,varrho}(z) = 1/2 sum_{gamma in Gamma_0(N)} Q_varrho(z)^-k |_{2k} gamma``,
    ``Q_varrho(z) = (z - varrho)(z - conj varrho)/(varrho - conj varrho)``.

    Rewritten as ``sum (2 i Im varrho')^k G_{varrho'}(z)`` over orbit points
    ``varrho' = gamma varrho`` modulo translation, ``gamma`` running over coprime
    rows ``(c, d)`` with ``N | c`` up to sign.
    """

    def __init__(self, k: int, N: int, point: complex, cfg: PrecisionConfig = DEFAULT):
        if k < 2:
            raise ValueError("weight parameter k must be at least 2")
        point = complex(point)
        if point.imag <= 0:
            raise ValueError("the point must lie in the upper half-plane")
        self.k, self.N, self.cfg = int(k), int(N), cfg
        if N == 1:
            _, point = reduce_to_fundamental(point)
        else:
            _, point = gamma0_raise(point, N)
        self.point = point
        self.last_error = 0.0
        self._orbit_R = 0.0
        self._orbit = np.zeros(0, dtype=complex)
        self._orbit_scale = np.zeros(0)
        self.pole_height = point.imag if N == 1 else self._max_orbit_height()

    def _max_orbit_height(self) -> float:
        # the point was raised already, so the maximum over N | c is attained at c = 0
        return self.point.imag

    def _grow_orbit(self, R: float):
        if R <= self._orbit_R:
            return
        with _GROW_LOCK:
            self._grow_orbit_locked(R)

    def _grow_orbit_locked(self, R: float):
        if R <= self._orbit_R:
            return
        p, N = self.point, self.N
        pts = []
        x, y = p.real, p.imag
        for c in range(0, int(R / y) + 1, N):
            h = math.sqrt(max(R * R - (c * y) ** 2, 0.0))
            if c == 0:
                ds = [1]
            else:
                ds = range(math.ceil(-c * x - h), math.floor(-c * x + h) + 1)
            for d in ds:
                if gcd(c, d) != 1:
                    continue
                m = abs(c * p + d)
                if m <= self._orbit_R or m > R:
                    continue
                if c == 0:
                    a, b = 1, 0
                else:
                    g, u, v = _egcd(d, -c)  # u d - v c = g
                    a, b = u * g, v * g
                pts.append((a * p + b) / (c * p + d))
        self._orbit = np.concatenate([self._orbit, np.array(pts, dtype=complex)])
        self._orbit_R = R

    def __call__(self, z: complex) -> complex:
        z = complex(z)
        if z.imag <= 0:
            raise ValueError("z must lie in the upper half-plane")
        if self.N == 1:
            (a, b, c, d), zf = reduce_to_fundamental(z)
            return complex((c * z + d) ** (-2 * self.k) * self._raw(zf))
        (a, b, c, d), zr = gamma0_raise(z, self.N)
        return complex((c * z + d) ** (-2 * self.k) * self._raw(zr))

    def _raw(self, z: complex) -> complex:
        k, y0 = self.k, self.point.imag
        R = 4.0
        tol = self.cfg.target_rel_error * 1e-2
        done = 0
        total = 0j
        while True:
            if R / y0 > self.cfg.max_terms * self.N:
                raise ConvergenceError("Petersson series truncation exceeds max_terms", estimate=total,
                                       error=self.last_error)
            if R * R / (y0 * self.N) > 2e7:
                raise ConvergenceError("Petersson series needs more than ~1e7 orbit points", estimate=total,
                                       error=self.last_error)
            self._grow_orbit(R)
            orbit = self._orbit
            pts = orbit[done:]
            if pts.size:
                dist = np.abs(((z - pts).real + 0.5) % 1 - 0.5 + 1j * (z - pts).imag)
                if np.any(dist < 1e-3 * pts.imag):
                    raise PoleError(f"z={z} is within the exclusion radius of an orbit point of {self.point}")
                total += np.sum((2j * pts.imag) ** k * translate_sum(z, pts, k))
            done = orbit.size
            delta = 2 + math.hypot(1, y0)
            if R > 2 * delta:
                lattice = 2 * math.pi / (self.N * y0) * (R / (R - delta)) * (R - delta) ** (2 - 2 * k) / (2 * k - 2)
                bound = _translate_bound(z.imag / 2, k)
                ya = y0 / (R - delta) ** 2
                if ya < z.imag / 4:
                    bound = min(bound, _cusp_translate_bound(z.imag, k, ya))
                tail = (2 * y0) ** k * lattice * bound
                self.last_error = tail
                if tail <= tol * abs(total):
                    return total
            R *= 1.4


def gamma0_raise(z: complex, N: int, max_steps: int = 500):
    """Greedy height raising in ``Gamma_0(N)``: returns ``(g, g z)`` with ``Im(g z)``
    maximal among ``g`` whose lower row has ``N | c`` and ``|c z + d| < 1`` at every step."""
    z = complex(z)
    g = (1, 0, 0, 1)
    for _ in range(max_steps):
        n = round(z.real)
        z -= n
        g = mat_mul((1, -n, 0, 1), g)
        x, y = z.real, z.imag
        best, best_m = None, 1 - 1e-12
        for c in range(N, int(1 / y) + 1, N):
            for d in range(math.floor(-c * x - 1), math.ceil(-c * x + 1) + 1):
                m = abs(c * z + d)
                if m < best_m and gcd(c, d) == 1:
                    best, best_m = (c, d), m
        if best is None:
            return g, z
        c, d = best
        a, b = _complete_row(c, d)
        z = (a * z + b) / (c * z + d)
        g = mat_mul((a, b, c, d), g)
    raise ConvergenceError(f"height raising in Gamma_0({N}) did not terminate", estimate=z)


def _egcd(x: int, y: int):
    """Return ``(g, u, v)`` with ``u x + v y = g``, ``g = +-1`` for coprime input."""
    old_r, r = x, y
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    # old_s d - old_t c = old_r with x = d, y = -c
    g = 1 if old_r > 0 else -1
    return g, old_s, old_t


def eval_petersson_eta(k: int, N: int, point: complex, z: complex, trunc: PrecisionConfig = DEFAULT) -> complex:
    return PeterssonEta(k, N, point, trunc)(z)


# ---------------------------------------------------------------------------
# level-1 q-expansions


def eisenstein_coeffs(weight: int, n_max: int) -> np.ndarray:
    """``E_weight = 1 - (2 weight / B_weight) sum sigma_{weight-1}(n) q^n``, coefficients 0..n_max."""
    factor = -Fraction(2 * weight) / _bernoulli(weight)
    out = [Fraction(1)]
    for n in range(1, n_max + 1):
        out.append(factor * sum(dd ** (weight - 1) for dd in divisors(n)))
    return np.array([int(v) for v in out], dtype=object)


def _bernoulli(n: int) -> Fraction:
    B = [Fraction(1)]
    for m in range(1, n + 1):
        B.append(-sum(math.comb(m + 1, j) * B[j] for j in range(m)) / (m + 1))
    return B[n]


def ramanujan_delta_coeffs(n_max: int) -> list[int]:
    """``tau(1..n_max)`` from ``q prod (1 - q^m)^24`` with exact integers."""
    poly = [0] * (n_max + 1)
    poly[0] = 1
    for m in range(1, n_max + 1):
        for _ in range(24):
            for i in range(n_max, m - 1, -1):
                poly[i] -= poly[i - m]
    return poly[:n_max]


def _qseries(coeffs, z: complex, start: int = 0) -> complex:
    q = np.exp(2j * math.pi * z)
    n = np.arange(start, start + len(coeffs))
    return complex(np.sum(np.array([complex(c) for c in coeffs]) * q ** n))


class QExpansionForm:
    """Level-1 holomorphic form of weight ``2k`` from its q-expansion ``a_1, a_2, ...``
    (no constant term), evaluated after reduction to the fundamental domain."""

    pole_height = 0.0

    def __init__(self, coeffs, k: int):
        self.coeffs = [complex(c) if not isinstance(c, (int, Fraction)) else float(c) for c in coeffs]
        self.k = int(k)

    def __call__(self, z: complex) -> complex:
        z = complex(z)
        (a, b, c, d), zf = reduce_to_fundamental(z)
        # |q| <= e^{-pi sqrt 3} in the fundamental domain
        return complex((c * z + d) ** (-2 * self.k) * _qseries(self.coeffs, zf, start=1))


class EtaTwoAtI:
    """Closed form of the Petersson series ``eta_{2,i}`` at level 1.

    Weight-4 forms with at most double poles on the orbit of ``i`` that vanish at
    the cusp form a line spanned by ``E4 Delta / E6^2`` (``E6^2`` times such a
    form is a cusp form of weight 16).  The scalar is fixed so that the local
    coefficient at ``i`` equals ``w_i = 2``.
    """

    k = 2
    pole_height = 1.0

    def __init__(self, n_terms: int = 40):
        self._e4 = eisenstein_coeffs(4, n_terms)
        self._e6 = eisenstein_coeffs(6, n_terms)
        self._delta = ramanujan_delta_coeffs(n_terms)
        self.scale = 1.0
        a = residue_at(self, 1j, 2, 0.1)
        self.scale = 2.0 / a

    def _raw(self, z: complex) -> complex:
        e4 = _qseries(self._e4, z)
        e6 = _qseries(self._e6, z)
        dl = _qseries(self._delta, z, start=1)
        return self.scale * e4 * dl / (e6 * e6)

    def __call__(self, z: complex) -> complex:
        z = complex(z)
        (a, b, c, d), zf = reduce_to_fundamental(z)
        if abs(zf - 1j) < 1e-6:
            raise PoleError(f"z={z} is an orbit point of i")
        return complex((c * z + d) ** (-4) * self._raw(zf))


# ---------------------------------------------------------------------------
# Fourier series


@dataclass
class FourierSeries2k:
    k: int
    N: int
    coeffs: dict = field(default_factory=dict)
    height_used: float | None = None
    error_estimates: dict = field(default_factory=dict)
    b0: complex | None = None

    def __getitem__(self, n: int) -> complex:
        return self.coeffs[n]

    @property
    def n_max(self) -> int:
        return max(self.coeffs) if self.coeffs else 0

    def array(self, n_max: int | None = None) -> np.ndarray:
        n_max = self.n_max if n_max is None else n_max
        return np.array([self.coeffs[n] for n in range(1, n_max + 1)], dtype=complex)

    def scaled(self, factor: complex) -> "FourierSeries2k":
        return FourierSeries2k(self.k, self.N, {n: factor * v for n, v in self.coeffs.items()}, self.height_used,
                               {n: abs(factor) * e for n, e in self.error_estimates.items()})

    def to_dict(self) -> dict:
        out = {"k": self.k, "N": self.N, "height_used": self.height_used,
               "coeffs": [{"n": n, "re": v.real, "im": v.imag, "error": self.error_estimates.get(n)}
                          for n, v in sorted(self.coeffs.items())]}
        if self.b0 is not None:
            out["b0"] = [self.b0.real, self.b0.imag]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "FourierSeries2k":
        coeffs = {int(e["n"]): complex(e["re"], e["im"]) for e in d["coeffs"]}
        errs = {int(e["n"]): e["error"] for e in d["coeffs"] if e.get("error") is not None}
        b0 = complex(*d["b0"]) if "b0" in d else None
        return cls(int(d["k"]), int(d["N"]), coeffs, d.get("height_used"), errs, b0)


def _line_coeffs(evaluator, y: float, n_max: int, samples: int):
    xs = np.arange(samples) / samples
    vals = np.array(pmap(lambda x: evaluator(complex(x, y)), xs))
    fft = np.fft.fft(vals) / samples
    n = np.arange(0, n_max + 1)
    b = fft[n] * np.exp(2 * math.pi * n * y)
    noise = np.abs(vals).max() * 1e-16 * np.exp(2 * math.pi * n * y)
    return b, noise


def fourier_coeffs(evaluator, y: float, n_max: int, samples: int = 256, y2: float | None = None,
                   rtol: float | None = None, k: int | None = None, N: int = 1) -> FourierSeries2k:
    """``b_n`` for ``1 <= n <= n_max`` from equispaced samples on ``Im z = y``.

    With a second height ``y2`` the error estimate is the difference between the
    two extractions (otherwise a rounding-noise estimate); if ``rtol`` is given a
    relative disagreement above it raises :class:`ConvergenceError`.
    """
    if samples < 4 * n_max:
        raise ValueError(f"need at least 4 n_max = {4 * n_max} samples, got {samples}")
    floor = getattr(evaluator, "pole_height", None)
    for h in (y, y2):
        if h is not None and floor is not None and h <= floor * (1 + 1e-9):
            raise ValueError(f"height {h} is not above the highest pole at {floor}")
    b, noise = _line_coeffs(evaluator, y, n_max, samples)
    errs = {n: float(noise[n]) for n in range(1, n_max + 1)}
    if y2 is not None:
        b2, noise2 = _line_coeffs(evaluator, y2, n_max, samples)
        for n in range(1, n_max + 1):
            errs[n] = float(abs(b[n] - b2[n]))
            # rounding noise of both extractions is tolerated on top of rtol
            if rtol is not None and errs[n] > rtol * max(abs(b[n]), abs(b2[n])) + 10 * (noise[n] + noise2[n]):
                raise ConvergenceError(f"b_{n} differs between heights {y} and {y2}: {b[n]} vs {b2[n]}",
                                       estimate=(b[n], b2[n]), error=errs[n])
    k = getattr(evaluator, "k", 0) if k is None else k
    return FourierSeries2k(k, N, {n: complex(b[n]) for n in range(1, n_max + 1)}, y, errs, complex(b[0]))


def C_k_delta(k: int, delta: int) -> Fraction:
    """``(-2 sgn(Delta))^k |Delta|^(k-1) / (k-1)!`` as an exact rational."""
    s = 1 if delta > 0 else -1
    return Fraction((-2 * s) ** k * abs(delta) ** (k - 1), math.factorial(k - 1))


def sqrt_delta(delta: int) -> complex:
    """Principal square root; ``i sqrt|Delta|`` for negative ``Delta``."""
    return complex(math.sqrt(delta)) if delta > 0 else 1j * math.sqrt(-delta)


def predicted_coeffs(table, k: int, delta: int, rho: int, n_max: int) -> FourierSeries2k:
    """``b_n = C i pi^k sqrt(Delta) n^(2k-1) sum_{d|n} (Delta/d) d^-k c+(|Delta| n^2/d^2, rho n/d)``."""
    N = table.N
    pref = float(C_k_delta(k, delta)) * 1j * math.pi ** k * sqrt_delta(delta)
    coeffs = {}
    for n in range(1, n_max + 1):
        acc = 0j
        for d in divisors(n):
            chi = kronecker(delta, d)
            if not chi:
                continue
            m = n // d
            D, r = abs(delta) * m * m, (rho * m) % (2 * N)
            try:
                c = table.cplus(D, r)
            except KeyError:
                raise KeyError(f"predicted_coeffs needs c+({D}, {r}) for n={n}") from None
            acc += chi * d ** (-float(k)) * c
        coeffs[n] = pref * n ** (2 * k - 1) * acc
    return FourierSeries2k(k, N, coeffs)


# ---------------------------------------------------------------------------
# canonical forms for Maass-form principal parts


@dataclass
class MeromFormSpec:
    k: int
    N: int
    delta: int
    rho: int
    principal_part: dict
    truncation: PrecisionConfig = DEFAULT

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        sigma = 1 if self.delta > 0 else -1
        for (D, r) in self.principal_part:
            if D >= 0:
                raise ValueError(f"principal part index D={D} must be negative")
            if (D - sigma * r * r) % (4 * self.N):
                raise ValueError(f"principal part index (D={D}, r={r}) violates D = {sigma} r^2 mod {4 * self.N}")

    @property
    def intro_regime(self) -> bool:
        return (-1) ** self.k * self.delta < 0

    @property
    def sigma(self) -> int:
        return 1 if self.delta > 0 else -1


class EtaCombination:
    """Linear combination ``sum coeff * FormSum``, evaluated termwise."""

    def __init__(self, k: int, terms: list):
        self.k = k
        self.terms = terms
        heights = [t.pole_height for _, t in terms]
        self.pole_height = max(heights) if heights else 0.0

    def __call__(self, z: complex) -> complex:
        return complex(sum(c * t(z) for c, t in self.terms)) if self.terms else 0j

    def residue_divisor(self) -> list[tuple[complex, float]]:
        acc: dict = {}
        for c, t in self.terms:
            for z, wt in t.residue_divisor():
                key = (round(z.real, 12), round(z.imag, 12))
                acc[key] = (z, acc.get(key, (z, 0.0))[1] + c * wt)
        return [v for v in acc.values() if abs(v[1]) > 0]


def eta_for_f(spec: MeromFormSpec):
    """Canonical form for the twisted Heegner divisor of a Maass form with the given principal part.

    Returns ``(evaluator, divisors)``.  The evaluator is
    ``1/2 sum_{r, D} c+(D, r) f_{k,D,r,Delta,rho}``: each principal-part pair
    ``(D, r), (D, -r)`` produces the same form sum, and the half makes the
    result agree with the Fourier expansion of the lift (see the notes on
    conventions in the README).
    """
    terms, divs = [], []
    for (D, r), c in sorted(spec.principal_part.items()):
        if c == 0:
            continue
        fs = FormSum(spec.k, spec.N, D, r, spec.delta, spec.rho, spec.truncation)
        terms.append((0.5 * c, fs))
        divs.append((c, fs.heegner_divisor()))
    return EtaCombination(spec.k, terms), divs


# ---------------------------------------------------------------------------
# residues


def residue_at(evaluator, point: complex, k: int, contour_radius: float = 0.05, samples: int = 64,
               return_imag: bool = False):
    """Local coefficient ``a`` in ``f = a Q_point(z)^-k + O(1)``.

    Samples ``f(z) (z - conj p)^(2k) / (2 i Im p)^k`` on the circle ``|X_p(z)| = contour_radius``
    (``X_p = (z - p)/(z - conj p)``) and extracts the ``X^-k`` coefficient by a discrete
    Fourier average.
    """
    p = complex(point)
    if not 0 < contour_radius < 1:
        raise ValueError("contour radius (in the disc coordinate) must lie in (0, 1)")
    theta = 2 * math.pi * np.arange(samples) / samples
    X = contour_radius * np.exp(1j * theta)
    zs = (p - p.conjugate() * X) / (1 - X)
    vals = np.array([evaluator(complex(z)) for z in zs])
    h = vals * (zs - p.conjugate()) ** (2 * k) / (2j * p.imag) ** k
    a = np.mean(h * X ** k)
    # a second pole inside the contour shows up as extra negative powers
    neg = np.mean(h * X ** (k + 1))
    if abs(neg) * contour_radius ** -(k + 1) > 1e-6 * max(abs(a) * contour_radius ** -k, 1e-300) and abs(neg) > 1e-9 * (abs(a) + 1):
        raise PoleError(f"a further singularity lies inside the contour around {p}")
    if return_imag:
        return float(a.real), float(a.imag)
    return float(a.real)


# ---------------------------------------------------------------------------
# Hecke operators and cusp forms


def hecke_scalar(coeffs: dict, m: int, k: int, n_max: int) -> dict:
    """``T_m`` on a weight-``2k`` level-1 q-expansion: ``b'_n = sum_{d | (m,n)} d^(2k-1) b_{mn/d^2}``."""
    out = {}
    for n in range(1, n_max + 1):
        acc = 0j
        for d in divisors(gcd(m, n)):
            idx = m * n // (d * d)
            if idx not in coeffs:
                raise KeyError(f"T_{m} needs b_{idx}")
            acc += d ** (2 * k - 1) * coeffs[idx]
        out[n] = acc
    return out


def load_qexp(source) -> dict:
    """Read ``{"level": N, "weight": 2k, "coeffs": [a1, a2, ...]}`` (path, JSON text or dict)."""
    if isinstance(source, dict):
        data = source
    else:
        text = str(source)
        if text.lstrip().startswith("{"):
            data = json.loads(text)
        else:
            with open(text) as fh:
                data = json.load(fh)
    coeffs = [Fraction(str(c)) for c in data["coeffs"]]
    return {"level": int(data["level"]), "weight": int(data["weight"]), "coeffs": coeffs}


def zeta_normalize(eta_series: FourierSeries2k, G_coeffs, k: int, delta: int, c_top: complex) -> FourierSeries2k:
    """``zeta = eta - C i pi^k sqrt(Delta) c_top G``; the first coefficient is set to 0 exactly."""
    G = list(G_coeffs)
    if not G or G[0] != 1:
        raise ValueError("G must be normalised with first coefficient 1")
    mult = float(C_k_delta(k, delta)) * 1j * math.pi ** k * sqrt_delta(delta) * c_top
    coeffs = {}
    for n, v in eta_series.coeffs.items():
        if n - 1 >= len(G):
            raise ValueError(f"G expansion too short for n={n}")
        coeffs[n] = v - mult * float(G[n - 1])
    coeffs[1] = 0j
    return FourierSeries2k(eta_series.k, eta_series.N, coeffs, eta_series.height_used,
                           dict(eta_series.error_estimates))
