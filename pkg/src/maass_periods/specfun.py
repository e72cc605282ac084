"""Whittaker M and W functions, incomplete Gamma, Gauss hypergeometric series
and Legendre polynomials, at real parameters.

Series are summed with a posteriori tail bounds; a series that does not reach
the requested accuracy within ``max_terms`` raises :class:`ConvergenceError`
carrying the partial estimate instead of returning a truncated value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate, special

__all__ = [
    "ConvergenceError",
    "PrecisionConfig",
    "hyp1f1_series",
    "whittaker_M",
    "script_M",
    "whittaker_W",
    "script_W",
    "inc_gamma",
    "hyp2f1",
    "legendre_P",
    "check_integral_W",
]


class ConvergenceError(ArithmeticError):
    """A series or quadrature failed to reach its target accuracy."""

    def __init__(self, msg, estimate=None, error=None):
        super().__init__(msg)
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class PrecisionConfig:
    target_rel_error: float = 1e-10
    max_terms: int = 20000
    quadrature_points: int = 256

    def __post_init__(self):
        if not self.target_rel_error > 0:
            raise ValueError("target_rel_error must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be at least 1")


DEFAULT = PrecisionConfig()


def _is_close_half_int(x: float, y: float) -> bool:
    return abs(x - y) < 1e-12


def hyp1f1_series(a: float, b: float, x, cfg: PrecisionConfig = DEFAULT):
    """Kummer ``1F1(a; b; x)`` for ``x >= 0`` by direct summation (array aware)."""
    if b <= 0 and float(b).is_integer():
        raise ValueError(f"1F1 parameter b={b} is a pole")
    x = np.asarray(x, dtype=float)
    term = np.ones_like(x)
    total = np.ones_like(x)
    for n in range(cfg.max_terms):
        term = term * (a + n) / (b + n) * x / (n + 1)
        total = total + term
        if n + 1 + a > 0 and n + 1 + b > 0:
            # later ratios are (a+m)/(b+m) * x/(m+1), bounded by the current one once x < m+1
            ratio = np.abs((a + n + 1) / (b + n + 1)) * x / (n + 2)
            if np.all(ratio < 1):
                tail = np.abs(term) * ratio / (1 - ratio)
                if np.all(tail <= cfg.target_rel_error * np.abs(total) * 1e-2):
                    return total if total.ndim else float(total)
    raise ConvergenceError(f"1F1({a}; {b}; x) did not converge in {cfg.max_terms} terms",
                           estimate=total)


def whittaker_M(kappa: float, mu: float, v, cfg: PrecisionConfig = DEFAULT):
    """``M_{kappa,mu}(v) = e^{-v/2} v^{mu+1/2} 1F1(mu - kappa + 1/2; 2 mu + 1; v)`` for ``v > 0``."""
    b = 2 * mu + 1
    if b <= 0 and float(b).is_integer():
        raise ValueError(f"M-Whittaker undefined: 2 mu + 1 = {b} is a nonpositive integer")
    v = np.asarray(v, dtype=float)
    val = np.exp(-v / 2) * v ** (mu + 0.5) * hyp1f1_series(mu - kappa + 0.5, b, v, cfg)
    return val if np.ndim(val) else float(val)


def script_M(kappa: float, s: float, v, cfg: PrecisionConfig = DEFAULT):
    """``v^{-kappa/2} M_{-kappa/2, s-1/2}(v)``, the seed of the Maass Poincare series."""
    v = np.asarray(v, dtype=float)
    val = v ** (-kappa / 2) * whittaker_M(-kappa / 2, s - 0.5, v, cfg)
    return val if np.ndim(val) else float(val)


def inc_gamma(s: float, x: float) -> float:
    """Upper incomplete Gamma ``Gamma(s, x)``."""
    if x < 0:
        raise ValueError("inc_gamma needs x >= 0")
    if x == 0:
        if s <= 0:
            raise ValueError("Gamma(s, 0) diverges for s <= 0")
        return math.gamma(s)
    if s > 0:
        return float(special.gammaincc(s, x) * special.gamma(s))
    if float(s).is_integer() and s == 0:
        return float(special.exp1(x))
    if x >= 1:
        # the continued fraction avoids the cancellation in the downward recurrence
        return math.exp(-x) * _inc_gamma_cf(s, x)
    # Gamma(s, x) = (Gamma(s + 1, x) - x^s e^{-x}) / s
    return (inc_gamma(s + 1, x) - x**s * math.exp(-x)) / s


def _inc_gamma_cf(a: float, x: float) -> float:
    """``e^x Gamma(a, x)`` by Legendre's continued fraction (modified Lentz); needs ``x`` away from 0."""
    tiny = 1e-300
    b = x + 1 - a
    c, d = 1 / tiny, 1 / b
    h = d
    for i in range(1, 2000):
        an = -i * (i - a)
        b += 2
        d = an * d + b
        d = tiny if abs(d) < tiny else d
        c = b + an / c
        c = tiny if abs(c) < tiny else c
        d = 1 / d
        delta = d * c
        h *= delta
        if abs(delta - 1) < 1e-16:
            return h * x**a
    raise ConvergenceError("incomplete Gamma continued fraction did not converge", estimate=h * x**a)


def _inc_gamma_scaled(a: float, x: float) -> float:
    """``e^x Gamma(a, x)`` without overflow for large ``x``."""
    if x < 30:
        return math.exp(x) * inc_gamma(a, x)
    return _inc_gamma_cf(a, x)


def _W_integral(kappa: float, mu: float, z: float) -> float:
    # W = z^{1/2-mu} e^{-z/2} / Gamma(mu-kappa+1/2) int_0^inf e^{-u} u^{mu-kappa-1/2} (z+u)^{mu+kappa-1/2} du
    a = mu - kappa + 0.5
    p, q = mu - kappa - 0.5, mu + kappa - 0.5

    def integrand(u):
        return math.exp(-u + p * math.log(u) + q * math.log(z + u)) if u > 0 else 0.0

    lg = math.lgamma(a)
    if a < 1:
        # one integration by parts removes the u^(a-1) singularity; 1/(a Gamma(a)) = 1/Gamma(a+1)
        def integrand(u):  # noqa: F811
            if u <= 0:
                return 0.0
            return math.exp(-u + a * math.log(u) + (q - 1) * math.log(z + u)) * (z + u - q)
        lg = math.lgamma(a + 1)

    split = max(1.0, p + q)
    val, err = integrate.quad(integrand, 0, split, limit=200, epsabs=0, epsrel=1e-13)
    val2, err2 = integrate.quad(integrand, split, np.inf, limit=200, epsabs=0, epsrel=1e-13)
    total = val + val2
    if abs(err) + abs(err2) > 1e-9 * abs(total):
        raise ConvergenceError("W-Whittaker quadrature did not converge", estimate=total,
                               error=abs(err) + abs(err2))
    log_pref = (0.5 - mu) * math.log(z) - z / 2 - lg
    return math.exp(log_pref) * total


def whittaker_W(kappa: float, mu: float, y: float) -> float:
    """``W_{kappa,mu}(y)`` for ``y > 0``.

    Closed forms cover ``mu = +-(kappa - 1/2)`` (``y^kappa e^{-y/2}``) and
    ``mu = +-(kappa + 1/2)`` (incomplete Gamma); otherwise the Laplace-type
    integral representation is used, combined with the three-term recurrence
    in ``kappa`` when that integral diverges at 0.
    """
    if y <= 0:
        raise ValueError("whittaker_W needs y > 0")
    mu = abs(mu)
    if _is_close_half_int(mu, abs(kappa - 0.5)):
        return y**kappa * math.exp(-y / 2)
    if _is_close_half_int(mu, abs(kappa + 0.5)):
        return y ** (-kappa) * math.exp(-y / 2) * _inc_gamma_scaled(2 * kappa + 1, y)
    if mu - kappa + 0.5 > 0:
        return _W_integral(kappa, mu, y)
    # shift kappa down into the integral range, then recur upwards with
    # W_{k+1} = (y - 2k) W_k - ((k - 1/2)^2 - mu^2) W_{k-1}
    m = math.floor(kappa - mu - 0.5) + 1
    k0 = kappa - m
    w_prev, w = _W_integral(k0 - 1, mu, y), _W_integral(k0, mu, y)
    for j in range(m):
        kk = k0 + j
        w_prev, w = w, (y - 2 * kk) * w - ((kk - 0.5) ** 2 - mu * mu) * w_prev
    return float(w)


def script_W(kappa: float, s: float, y: float) -> float:
    """``|y|^{-kappa/2} W_{(kappa/2) sgn(y), s-1/2}(|y|)`` for real ``y != 0``."""
    if y == 0:
        raise ValueError("script_W is undefined at y = 0")
    ay = abs(y)
    return ay ** (-kappa / 2) * whittaker_W(kappa / 2 if y > 0 else -kappa / 2, s - 0.5, ay)


def hyp2f1(a: float, b: float, c: float, z: float, cfg: PrecisionConfig = DEFAULT) -> float:
    """Gauss series ``2F1(a, b; c; z)`` for ``0 <= z < 1``."""
    if c <= 0 and float(c).is_integer():
        raise ValueError(f"2F1 undefined: c={c} is a nonpositive integer")
    if not 0 <= z < 1:
        raise ValueError("hyp2f1 is implemented for 0 <= z < 1 only")
    term, total = 1.0, 1.0
    for n in range(cfg.max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        total += term
        m = n + 1
        if m + min(a, b, c) > 0:
            ratio = abs((a + m) * (b + m) / ((c + m) * (m + 1))) * z
            # ratios tend to z monotonically once m exceeds the parameter magnitudes
            rho = max(ratio, z)
            if m > abs(a) + abs(b) + abs(c) and rho < 1:
                tail = abs(term) * rho / (1 - rho)
                if tail <= cfg.target_rel_error * abs(total) * 1e-2:
                    return total
    raise ConvergenceError(f"2F1({a},{b};{c};{z}) did not converge in {cfg.max_terms} terms",
                           estimate=total)


def legendre_P(ell: int, x):
    """Legendre polynomial ``P_ell(x)``; exact for ``int``/``Fraction`` input, works for complex."""
    if ell < 0:
        raise ValueError("degree must be nonnegative")
    exact = isinstance(x, (int, Fraction))
    one = Fraction(1) if exact else 1.0
    p0, p1 = one, (Fraction(x) if exact else x)
    if ell == 0:
        return p0
    for n in range(1, ell):
        if exact:
            p0, p1 = p1, (Fraction(2 * n + 1) * x * p1 - n * p0) / (n + 1)
        else:
            p0, p1 = p1, ((2 * n + 1) * x * p1 - n * p0) / (n + 1)
    return p1


def check_integral_W(kappa: float, s: float, alpha: float, beta: float) -> tuple[float, float]:
    """Both sides of the Whittaker integral identity.

    ``lhs = int_0^inf v^{kappa-2} W_{kappa,s}(alpha v) exp(-alpha v/2 - beta/v) dv`` by adaptive
    quadrature, ``rhs = alpha^{1/4-kappa/2} beta^{kappa/2-3/4} sqrt(pi) W_{0,3/2-2s}(4 sqrt(alpha beta))``
    through the K-Bessel form ``W_{0,mu}(2x) = sqrt(2x/pi) K_mu(x)``.
    """
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")

    def integrand(v):
        return v ** (kappa - 2) * script_W(kappa, s, alpha * v) * math.exp(-alpha * v / 2 - beta / v)

    # the integrand peaks near sqrt(beta/alpha); split there
    v0 = math.sqrt(beta / alpha)
    pieces = [(0, v0 / 4), (v0 / 4, v0), (v0, 4 * v0), (4 * v0, np.inf)]
    lhs, err = 0.0, 0.0
    for lo, hi in pieces:
        val, e = integrate.quad(integrand, lo, hi, limit=200, epsabs=0, epsrel=1e-11)
        lhs += val
        err += e
    if err > 1e-8 * abs(lhs):
        raise ConvergenceError("integral W quadrature failed", estimate=lhs, error=err)
    x = 2 * math.sqrt(alpha * beta)
    w0 = math.sqrt(2 * x / math.pi) * special.kv(1.5 - 2 * s - 0.5, x)
    rhs = alpha ** (0.25 - kappa / 2) * beta ** (kappa / 2 - 0.75) * math.sqrt(math.pi) * w0
    return lhs, rhs
