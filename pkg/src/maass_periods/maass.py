"""Vector-valued harmonic Maass forms for the Weil representation.

Contents: Maass Poincare series (direct coset summation, optionally after
reduction to the fundamental domain), coefficient tables with two-height
Fourier extraction, Hecke operators on tables and numerical raising.

Index conventions: components are ``e_r`` for ``r`` in ``Z/2NZ`` and Fourier
indices are discriminants ``D`` with ``D = sigma r^2 (mod 4N)``, so that the
term ``c(D, r) e(D tau / 4N)`` sits in component ``r``.  ``sigma = -1`` for the
dual representation.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from math import gcd

import numpy as np
from scipy import special

from .arith import kronecker
from .parallel import pmap
from .specfun import DEFAULT, ConvergenceError, PrecisionConfig, script_M
from .weil import MetaplecticElement, WeilRep, reduce_to_fundamental

__all__ = [
    "WeilRep",
    "MetaplecticElement",
    "CoeffTable",
    "weil_matrix",
    "PoincareSeries",
    "poincare_eval",
    "extract_coeffs_two_height",
    "poincare_coefficients",
    "hecke_Tp",
    "raising_numeric",
    "laplacian_numeric",
]


def weil_matrix(rep: WeilRep, g: MetaplecticElement) -> np.ndarray:
    return rep.matrix(g)


def _check_index(N: int, sigma: int, D: int, r: int):
    if (D - sigma * r * r) % (4 * N):
        raise ValueError(f"index (D={D}, r={r}) violates D = {sigma:+d} r^2 mod {4 * N}")


# ---------------------------------------------------------------------------
# Poincare series


_TABLE_LOCK = threading.RLock()


class PoincareSeries:
    """``P_{kappa,D,r}(tau, s)`` for ``kappa < 0``, ``D < 0`` and ``s > 1``.

    The sum over ``Mp2 / Gamma_infty`` collapses to coprime ``(c, d)`` with
    ``c > 0`` (plus the identity), principal branch, seed vector
    ``e_r + eps e_{-r}`` and prefactor ``1 / Gamma(2s)``.
    """

    def __init__(self, rep: WeilRep, kappa: float, D: int, r: int, s: float | None = None,
                 cfg: PrecisionConfig = DEFAULT):
        if not kappa < 0:
            raise ValueError("Poincare series need kappa < 0")
        if not (2 * kappa) % 2 == 1:
            raise ValueError("kappa must be a half-integer")
        if D >= 0:
            raise ValueError("Poincare series are indexed by D < 0")
        _check_index(rep.N, rep.sigma, D, r)
        self.rep, self.kappa, self.D, self.r = rep, float(kappa), int(D), int(r) % rep.dim
        self.s = 1 - kappa / 2 if s is None else float(s)
        if not self.s > 1:
            raise ValueError("s must exceed 1 for absolute convergence")
        self.cfg = cfg
        self.vec = rep.symmetric_vector(self.r, self.kappa)
        self.special = abs(self.s - (1 - self.kappa / 2)) < 1e-14
        self.last_tail = 0.0
        self.last_terms = 0

    # seed M_s(w) / Gamma(2s) as a function of w = pi |D| v / N
    def seed(self, w):
        w = np.asarray(w, dtype=float)
        if self.special:
            return np.exp(w / 2) * special.gammainc(1 - self.kappa, w)
        return script_M(self.kappa, self.s, w) / special.gamma(2 * self.s)

    def _ensure_tables(self, cmax: int):
        """Flat tables over ``(c, d0)``, ``0 <= d0 < c``, at offset ``c(c-1)/2 + d0``.

        ``W`` rows hold ``rho(M0)^{-1} v`` for ``M0 = (a0, b0; c, d0)`` (zero if not
        coprime) and ``A0`` holds ``a0 = d0^{-1} mod c``.
        """
        if cmax <= getattr(self, "_cmax", 0):
            return
        with _TABLE_LOCK:
            self._grow_tables(cmax)

    def _grow_tables(self, cmax: int):
        have = getattr(self, "_cmax", 0)
        if cmax <= have:
            return
        size = cmax * (cmax + 1) // 2
        W = np.zeros((size, self.rep.dim), dtype=complex)
        A0 = np.zeros(size)
        if have:
            n_old = have * (have + 1) // 2
            W[:n_old] = self._W
            A0[:n_old] = self._A0
        for c in range(have + 1, cmax + 1):
            off = c * (c - 1) // 2
            for d0 in range(c):
                if gcd(c, d0) != 1:
                    continue
                a0 = pow(d0, -1, c) if c > 1 else 0
                b0 = (a0 * d0 - 1) // c
                rho = self.rep.principal(a0, b0, c, d0)
                # unitary: inverse is the adjoint
                W[off + d0] = rho.conj().T @ self.vec
                A0[off + d0] = a0
        self._W, self._A0, self._cmax = W, A0, cmax

    def _tail(self, R: float, y: float) -> float:
        """Bound for the omitted terms with ``|c tau + d| > R``."""
        s, kap = self.s, self.kappa
        wR = math.pi * abs(self.D) * y / (self.rep.N * R * R)
        lead = (math.pi * abs(self.D) * y / self.rep.N) ** (s - kap / 2) * math.exp(wR / 2) / math.gamma(2 * s)
        delta = 1 + math.hypot(1, y) + 1
        if R <= 2 * delta:
            return math.inf
        lattice = 2 * math.pi / y * (R / (R - delta)) * (R - delta) ** (2 - 2 * s) / (2 * s - 2)
        return 2 * lead * lattice

    def _radius(self, y: float, scale: float) -> float:
        tol = self.cfg.target_rel_error * scale
        R = 4.0
        while self._tail(R, y) > tol:
            R *= 1.25
            if R / y > self.cfg.max_terms:
                raise ConvergenceError(
                    f"coset sum needs |c| > {self.cfg.max_terms} at Im(tau) = {y:.3g}",
                    error=self._tail(self.cfg.max_terms * y, y))
        return R

    def direct(self, tau: complex) -> np.ndarray:
        """Direct summation at ``tau`` without any reduction."""
        x, y = tau.real, tau.imag
        if y <= 0:
            raise ValueError("tau must lie in the upper half-plane")
        N, D, kap = self.rep.N, self.D, self.kappa
        w0 = math.pi * abs(D) * y / N
        ident = self.seed(w0) * np.exp(2j * math.pi * D * x / (4 * N)) * self.vec
        R = self._radius(y, max(1.0, float(np.abs(ident).max())))
        cs, ds = [], []
        for c in range(1, int(R / y) + 1):
            h = math.sqrt(max(R * R - (c * y) ** 2, 0.0))
            d = np.arange(math.ceil(-c * x - h), math.floor(-c * x + h) + 1)
            d = d[np.gcd(d, c) == 1]
            cs.append(np.full(d.size, c))
            ds.append(d)
        total = ident.astype(complex)
        if cs:
            c = np.concatenate(cs)
            d = np.concatenate(ds)
            total = total + self._sum_terms(tau, c, d)
            self.last_terms = c.size + 1
        self.last_tail = self._tail(R, y)
        return total

    def _sum_terms(self, tau: complex, c: np.ndarray, d: np.ndarray) -> np.ndarray:
        N, D, kap, sig = self.rep.N, self.D, self.kappa, self.rep.sigma
        d0 = np.mod(d, c)
        j = (d - d0) // c
        self._ensure_tables(int(c.max()))
        idx = c * (c - 1) // 2 + d0
        W = self._W[idx]
        a0 = self._A0[idx]
        ctd = c * tau + d
        v = tau.imag / np.abs(ctd) ** 2
        u = a0 / c - (1 / (c * ctd)).real
        scal = np.exp(-kap * np.log(ctd)) * self.seed(math.pi * abs(D) * v / N) \
            * np.exp(2j * math.pi * D * u / (4 * N))
        rr = np.arange(self.rep.dim)
        phase = np.exp(-2j * math.pi * sig * np.outer(j, rr * rr) / (4 * N))
        return (scal[:, None] * phase * W).sum(axis=0)

    def __call__(self, tau: complex, reduce: bool = True) -> np.ndarray:
        if not reduce:
            return self.direct(tau)
        g, tf = reduce_to_fundamental(complex(tau))
        a, b, c, d = g
        val = self.direct(tf)
        if g == (1, 0, 0, 1):
            return val
        rho = self.rep.principal(a, b, c, d)
        return np.exp(-self.kappa * np.log(c * tau + d)) * (rho.conj().T @ val)

    def evaluate_many(self, taus, reduce: bool = True) -> np.ndarray:
        return np.array([self(complex(t), reduce) for t in np.ravel(taus)])


def poincare_eval(rep: WeilRep, kappa: float, D: int, r: int, tau: complex, s: float | None = None,
                  trunc: PrecisionConfig = DEFAULT, reduce: bool = True) -> np.ndarray:
    return PoincareSeries(rep, kappa, D, r, s, trunc)(complex(tau), reduce)


# ---------------------------------------------------------------------------
# coefficient tables


@dataclass
class CoeffTable:
    """Fourier coefficients ``c+(D, r)`` and ``c-(D, r)`` of a vector-valued harmonic form.

    ``D_min``: indices below it are known to vanish (used by Hecke operators).
    ``residual``: optional per-index consistency measure from extraction.
    """

    N: int
    weight: float
    dual: bool
    holo: dict = field(default_factory=dict)
    nonholo: dict = field(default_factory=dict)
    D_min: int | None = None
    residual: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (2 * self.weight) % 2 == 1:
            raise ValueError("weight must be a half-integer")
        for D, r in list(self.holo) + list(self.nonholo):
            _check_index(self.N, self.sigma, D, r)
        self.holo = {(int(D), int(r) % (2 * self.N)): complex(v) for (D, r), v in self.holo.items()}
        self.nonholo = {(int(D), int(r) % (2 * self.N)): complex(v) for (D, r), v in self.nonholo.items()}

    @property
    def sigma(self) -> int:
        return -1 if self.dual else 1

    @property
    def principal_part(self) -> dict:
        return {k: v for k, v in self.holo.items() if k[0] <= 0}

    def cplus(self, D: int, r: int | None = None) -> complex:
        if r is None:
            r = self.residue_for(D)
        key = (D, r % (2 * self.N))
        if key in self.holo:
            return self.holo[key]
        if self.D_min is not None and D < self.D_min:
            return 0j
        raise KeyError(f"coefficient c+({D}, {r}) not in table")

    def residue_for(self, D: int) -> int:
        """Smallest ``r`` with ``D = sigma r^2 mod 4N``."""
        for r in range(2 * self.N):
            if (D - self.sigma * r * r) % (4 * self.N) == 0:
                return r
        raise ValueError(f"{D} is not a square class mod {4 * self.N}")

    def to_dict(self) -> dict:
        keys = sorted(set(self.holo) | set(self.nonholo))
        entries = []
        for D, r in keys:
            cp = self.holo.get((D, r), 0j)
            cm = self.nonholo.get((D, r), 0j)
            e = {"D": D, "r": r, "cplus": [cp.real, cp.imag], "cminus": [cm.real, cm.imag]}
            if (D, r) in self.residual:
                e["residual"] = self.residual[(D, r)]
            entries.append(e)
        out = {"N": self.N, "weight_times_2": int(round(2 * self.weight)), "dual": self.dual, "entries": entries}
        if self.D_min is not None:
            out["D_min"] = self.D_min
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: dict) -> "CoeffTable":
        holo, nonholo, res = {}, {}, {}
        for e in data["entries"]:
            key = (int(e["D"]), int(e["r"]))
            holo[key] = complex(*e.get("cplus", [0, 0]))
            cm = complex(*e.get("cminus", [0, 0]))
            if cm != 0:
                nonholo[key] = cm
            if "residual" in e:
                res[key] = float(e["residual"])
        return cls(int(data["N"]), data["weight_times_2"] / 2, bool(data["dual"]), holo, nonholo,
                   data.get("D_min"), res)

    @classmethod
    def from_json(cls, text: str) -> "CoeffTable":
        return cls.from_dict(json.loads(text))


def _basis(kappa: float, N: int, D: int, y: float) -> tuple[float, float | None]:
    """Holomorphic and non-holomorphic radial factors of the ``D``-th term at height ``y``."""
    hol = math.exp(-math.pi * D * y / (2 * N))
    if D < 0:
        w = math.pi * abs(D) * y / N
        return hol, float(special.gammaincc(1 - kappa, w) * special.gamma(1 - kappa)) * hol
    if D == 0:
        return 1.0, y ** (1 - kappa)
    return hol, None


def _fourier_samples(evaluator, y: float, M: int) -> np.ndarray:
    us = np.arange(M) / M
    return np.array(pmap(lambda u: np.asarray(evaluator(complex(u, y))), us))


def extract_coeffs_two_height(evaluator, kappa: float, N: int, dual: bool, y1: float, y2: float,
                              D_range, M: int = 128, samples: dict | None = None) -> CoeffTable:
    """Separate ``c+`` and ``c-`` using Fourier integrals at two heights.

    ``samples`` may map a height to a precomputed ``(M, 2N)`` array of values on
    ``u = j/M``; this lets several extractions share evaluations.
    """
    if y1 <= 0 or y2 <= 0:
        raise ValueError("heights must be positive")
    if abs(y1 - y2) < 1e-3 * max(y1, y2):
        raise ValueError(f"heights {y1} and {y2} are too close to separate the coefficient pair")
    sigma = -1 if dual else 1
    samples = {} if samples is None else samples
    for y in (y1, y2):
        if y not in samples:
            samples[y] = _fourier_samples(evaluator, y, M)
    F1, F2 = samples[y1], samples[y2]
    us1 = np.arange(F1.shape[0]) / F1.shape[0]
    us2 = np.arange(F2.shape[0]) / F2.shape[0]
    noise1, noise2 = np.abs(F1).max() + 1e-300, np.abs(F2).max() + 1e-300
    table = CoeffTable(N, kappa, dual, D_min=min(D_range))
    for D in D_range:
        for r in range(2 * N):
            if (D - sigma * r * r) % (4 * N):
                continue
            a1 = np.mean(F1[:, r] * np.exp(-2j * math.pi * D * us1 / (4 * N)))
            a2 = np.mean(F2[:, r] * np.exp(-2j * math.pi * D * us2 / (4 * N)))
            h1, g1 = _basis(kappa, N, D, y1)
            h2, g2 = _basis(kappa, N, D, y2)
            if g1 is None:
                c1, c2 = a1 / h1, a2 / h2
                w1, w2 = (h1 / noise1) ** 2, (h2 / noise2) ** 2
                cp = (w1 * c1 + w2 * c2) / (w1 + w2)
                table.holo[(D, r)] = complex(cp)
                scale = max(abs(c1), abs(c2))
                table.residual[(D, r)] = float(abs(c1 - c2) / scale) if scale > 0 else 0.0
            else:
                A = np.array([[h1, g1], [h2, g2]])
                A = A / np.abs(A).max(axis=1, keepdims=True)
                cond = np.linalg.cond(A)
                if not cond < 1e12:
                    raise ConvergenceError(f"two-height system for D={D} is ill-conditioned", error=cond)
                cp, cm = np.linalg.solve(np.array([[h1, g1], [h2, g2]]), np.array([a1, a2]))
                table.holo[(D, r)] = complex(cp)
                table.nonholo[(D, r)] = complex(cm)
                table.residual[(D, r)] = float(cond)
    return table


def _significant_D(D0: int, N: int, y: float, digits: float = 36.0) -> int:
    """Largest ``D`` whose term ``exp(pi sqrt(|D0| D)/N - pi D y / 2N)`` is not negligible."""
    peak = math.pi * abs(D0) / (2 * N * y)
    D = max(1, int(abs(D0) / y**2))
    while math.pi * math.sqrt(abs(D0) * D) / N - math.pi * D * y / (2 * N) > peak - digits * math.log(10) / 2 - 40:
        D = int(D * 1.2) + 1
    return D


def poincare_coefficients(series: PoincareSeries, D_values, heights: dict | None = None,
                          ratio: float = 1.25) -> CoeffTable:
    """Coefficients ``c+(D, r)`` of a Poincare series at the listed indices.

    Each ``D`` uses a pair of heights near the optimum ``1/sqrt(D)`` (for ``N = 1``),
    snapped to a geometric grid so that neighbouring indices share samples.
    ``heights`` optionally maps ``D`` to an explicit pair.
    """
    rep = series.rep
    N = rep.N
    samples: dict[float, np.ndarray] = {}
    out = CoeffTable(N, series.kappa, rep.dual, D_min=series.D)
    D_values = sorted(set(int(D) for D in D_values))
    for D in D_values:
        if heights and D in heights:
            y1, y2 = heights[D]
        else:
            target = math.sqrt(N / max(abs(D), 1)) * math.sqrt(N / abs(series.D))
            m = round(math.log(target) / math.log(ratio))
            y1, y2 = ratio**m, ratio ** (m + 1)
        for y in (y1, y2):
            if y not in samples:
                Dsig = _significant_D(series.D, N, y)
                M = 16
                while M < (Dsig + abs(series.D)) / (4 * N) + 8:
                    M *= 2
                samples[y] = _fourier_samples(series, y, M)
        t = extract_coeffs_two_height(series, series.kappa, N, rep.dual, y1, y2, [D], samples=samples)
        out.holo.update(t.holo)
        out.nonholo.update(t.nonholo)
        out.residual.update(t.residual)
    return out


# ---------------------------------------------------------------------------
# Hecke operators


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, math.isqrt(p) + 1))


def hecke_Tp(table: CoeffTable, p: int, k: int | None = None, indices=None) -> CoeffTable:
    """Hecke operator ``T(p^2)`` on the holomorphic coefficients of ``table``.

    ``c'(D,r) = c(p^2 D, p r) + p^(k-1) (sigma D / p) c(D, r) + p^(2k-1) c(D/p^2, r/p)``
    with ``k = weight - 1/2`` unless given.  ``r/p`` is any residue ``r'`` with
    ``p r' = r`` and ``D/p^2 = sigma r'^2``.  Without ``indices`` the output holds
    every index whose source ``p^2 D`` is present.
    """
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    if gcd(p, table.N) != 1:
        raise ValueError(f"p={p} divides the level N={table.N}")
    N, sig = table.N, table.sigma
    lam = table.weight - 0.5 if k is None else k
    if indices is None:
        indices = [key for key in table.holo if (p * p * key[0], (p * key[1]) % (2 * N)) in table.holo]
    out = CoeffTable(N, table.weight, table.dual, D_min=table.D_min)
    for D, r in indices:
        src = (p * p * D, (p * r) % (2 * N))
        if src not in table.holo:
            raise KeyError(f"Hecke operator T_{p} at (D={D}, r={r}) needs c({src[0]}, {src[1]})")
        val = table.holo[src]
        chi = kronecker(sig * D, p)
        if chi:
            val += p ** (lam - 1) * chi * table.cplus(D, r)
        if D % (p * p) == 0:
            Dq = D // (p * p)
            for rq in range(2 * N):
                if (p * rq - r) % (2 * N) == 0 and (Dq - sig * rq * rq) % (4 * N) == 0:
                    val += p ** (2 * lam - 1) * table.cplus(Dq, rq)
                    break
        out.holo[(D, r % (2 * N))] = complex(val)
    return out


# ---------------------------------------------------------------------------
# differential operators


def _richardson(fn, h: float):
    d1 = fn(h)
    d2 = fn(h / 2)
    val = (4 * d2 - d1) / 3
    err = np.abs(d2 - d1).max() / 3
    return val, err


def _raise_once(evaluator, kappa: float, h: float):
    def raised(tau: complex):
        v = tau.imag
        if h < 1e-7 * max(1.0, abs(tau)):
            raise ValueError(f"finite-difference step {h} too small at tau={tau}")
        if h >= v:
            raise ValueError("finite-difference step must stay inside the upper half-plane")

        def deriv(hh):
            du = (np.asarray(evaluator(tau + hh)) - np.asarray(evaluator(tau - hh))) / (2 * hh)
            dv = (np.asarray(evaluator(tau + 1j * hh)) - np.asarray(evaluator(tau - 1j * hh))) / (2 * hh)
            return 1j * du + dv

        d, err = _richardson(deriv, h)
        val = d + kappa / v * np.asarray(evaluator(tau))
        raised.last_error = err
        return val

    raised.last_error = 0.0
    return raised


def raising_numeric(evaluator, kappa: float, n: int, tau: complex, h: float = 1e-3):
    """``R^n_kappa F(tau)`` by nested central differences with one Richardson step per level.

    ``R_kappa = 2i d/dtau + kappa/v = i d/du + d/dv + kappa/v``.  Returns
    ``(value, error_estimate)``; the estimate is the outermost Richardson gap.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    tau = complex(tau)
    if n == 0:
        return np.asarray(evaluator(tau)), 0.0
    # inner levels use smaller steps so their own error is below the outer one
    fn = evaluator
    steps = [h * 0.5 ** (n - 1 - i) for i in range(n)]
    for i in range(n):
        fn = _raise_once(fn, kappa + 2 * i, steps[i])
    val = fn(tau)
    err = fn.last_error
    if not np.all(np.isfinite(val)):
        raise ConvergenceError("raising operator produced non-finite values", estimate=val)
    return val, float(err)


def laplacian_numeric(evaluator, kappa: float, tau: complex, h: float = 1e-3):
    """Weight-``kappa`` Laplacian ``-v^2 (F_uu + F_vv) + i kappa v (F_u + i F_v)`` by 5-point stencils."""
    tau = complex(tau)
    v = tau.imag
    F = lambda t: np.asarray(evaluator(t))

    def lap(hh):
        f0 = F(tau)
        fu1, fu2 = F(tau + hh), F(tau - hh)
        fv1, fv2 = F(tau + 1j * hh), F(tau - 1j * hh)
        fuu = (fu1 - 2 * f0 + fu2) / hh**2
        fvv = (fv1 - 2 * f0 + fv2) / hh**2
        fu = (fu1 - fu2) / (2 * hh)
        fv = (fv1 - fv2) / (2 * hh)
        return -v * v * (fuu + fvv) + 1j * kappa * v * (fu + 1j * fv)

    return _richardson(lap, h)
