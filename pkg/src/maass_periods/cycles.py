"""Closed geodesics, cycle integrals and local expansion coefficients.

A hyperbolic ``gamma = (a b; c d)`` determines ``Q_gamma = [c, d - a, -b]`` of
discriminant ``d_gamma = tr(gamma)^2 - 4``.  The pairing of a weight ``2k`` form
with the cycle is

    Re( (i / sqrt(d_gamma))^(k-1) * int_{z0}^{gamma z0} f(z) Q_gamma(z, 1)^(k-1) dz ),

along a path avoiding the poles of ``f``.  Paths are chains of straight segments
and circular arcs; each piece is integrated by adaptive Gauss-Legendre.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .maass import raising_numeric
from .specfun import ConvergenceError, hyp2f1, legendre_P

__all__ = [
    "CycleError",
    "GeodesicCycle",
    "PairingResult",
    "cycle_from_matrix",
    "orbit_points_in_box",
    "plan_path",
    "integrate_path",
    "pairing",
    "path_independence_check",
    "loop_prediction",
    "elliptic_coeff_Q",
    "elliptic_coeff_numeric",
    "raising_hypergeometric_check",
]


class CycleError(ValueError):
    pass


def _fundamental_unit(D: int, limit: int = 10**6) -> tuple[int, int]:
    """Smallest ``(t, u)``, ``u > 0``, with ``t^2 - D u^2 = 4``."""
    for u in range(1, limit):
        t2 = 4 + D * u * u
        t = math.isqrt(t2)
        if t * t == t2:
            return t, u
    raise CycleError(f"no unit found for discriminant {D} below u = {limit}")


@dataclass
class GeodesicCycle:
    gamma: tuple[int, int, int, int]
    base_point: complex
    path_policy: str = "direct_segment"
    waypoints: list = field(default_factory=list)

    @property
    def Q(self) -> tuple[int, int, int]:
        a, b, c, d = self.gamma
        return (c, d - a, -b)

    @property
    def d_gamma(self) -> int:
        a, b, c, d = self.gamma
        return (a + d) ** 2 - 4

    def Q_of_z(self, z):
        A, B, C = self.Q
        return A * z * z + B * z + C

    def act(self, z: complex) -> complex:
        a, b, c, d = self.gamma
        return (a * z + b) / (c * z + d)

    @property
    def endpoint(self) -> complex:
        return self.act(self.base_point)

    @property
    def fixed_points(self) -> tuple[float, float]:
        a, b, c, d = self.gamma
        s = math.sqrt(self.d_gamma)
        if c == 0:
            raise CycleError("hyperbolic matrix with c = 0 cannot occur in SL2(Z)")
        return tuple(sorted(((a - d - s) / (2 * c), (a - d + s) / (2 * c))))

    def with_waypoints(self, waypoints) -> "GeodesicCycle":
        return GeodesicCycle(self.gamma, self.base_point, "custom_waypoints", [complex(w) for w in waypoints])

    def with_base_point(self, z0: complex) -> "GeodesicCycle":
        return GeodesicCycle(self.gamma, complex(z0), self.path_policy, list(self.waypoints))

    def to_dict(self) -> dict:
        return {"gamma": list(self.gamma), "base_point": [self.base_point.real, self.base_point.imag],
                "waypoints": [[w.real, w.imag] for w in self.waypoints]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: dict) -> "GeodesicCycle":
        cyc = cycle_from_matrix(tuple(int(x) for x in data["gamma"]))
        if data.get("base_point") is not None:
            cyc = cyc.with_base_point(complex(*data["base_point"]))
        wps = data.get("waypoints") or []
        if wps:
            cyc = cyc.with_waypoints([complex(*w) for w in wps])
        return cyc


def cycle_from_matrix(gamma, base_point: complex | None = None) -> GeodesicCycle:
    """Validated cycle with the apex of the fixed-point semicircle as default base point."""
    a, b, c, d = (int(x) for x in gamma)
    if a * d - b * c != 1:
        raise CycleError(f"({a},{b};{c},{d}) has determinant {a * d - b * c}, not 1")
    if abs(a + d) <= 2:
        raise CycleError(f"({a},{b};{c},{d}) is not hyperbolic (|trace| = {abs(a + d)})")
    A, B, C = c, d - a, -b
    u = gcd(gcd(abs(A), abs(B)), abs(C))
    D = (B * B - 4 * A * C) // (u * u)
    t0, u0 = _fundamental_unit(D)
    if u != u0:
        raise CycleError(f"({a},{b};{c},{d}) is a proper power (u = {u}, fundamental u = {u0})")
    cyc = GeodesicCycle((a, b, c, d), 0j)
    if base_point is None:
        lo, hi = cyc.fixed_points
        base_point = complex((lo + hi) / 2, (hi - lo) / 2)
    cyc.base_point = complex(base_point)
    return cyc


# ---------------------------------------------------------------------------
# poles near a path


def orbit_points_in_box(point: complex, N: int, xmin: float, xmax: float, ymin: float) -> list[complex]:
    """All ``Gamma_0(N)``-translates of ``point`` with real part in ``[xmin, xmax]`` and ``Im >= ymin``."""
    p = complex(point)
    y = p.imag
    R2 = y / ymin  # |c p + d|^2 <= R2
    out = []
    cmax = int(math.sqrt(R2) / y) + 1
    for c in range(0, cmax + 1, N):
        if c == 0:
            rows = [(0, 1)]
        else:
            h = math.sqrt(max(R2 - (c * y) ** 2, 0.0))
            rows = [(c, d) for d in range(math.ceil(-c * p.real - h), math.floor(-c * p.real + h) + 1)
                    if gcd(c, d) == 1]
        for c_, d_ in rows:
            if abs(c_ * p + d_) ** 2 > R2:
                continue
            if c_ == 0:
                q = p
            else:
                # any a, b with a d - b c = 1; the translate ambiguity is removed below
                a_, b_ = _bezout(c_, d_)
                q = (a_ * p + b_) / (c_ * p + d_)
            for t in range(math.ceil(xmin - q.real), math.floor(xmax - q.real) + 1):
                out.append(q + t)
    uniq = []
    for q in out:
        if all(abs(q - r) > 1e-9 for r in uniq):
            uniq.append(q)
    return uniq


def _bezout(c: int, d: int) -> tuple[int, int]:
    """``(a, b)`` with ``a d - b c = 1``."""
    old_r, r, old_s, s, old_t, t = d, -c, 1, 0, 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    g = old_r
    return old_s * g, old_t * g  # old_s d + old_t (-c) = g = +-1


def _poles_near(poles, N, pts, margin):
    if not poles:
        return []
    xs = [p.real for p in pts]
    ys = [p.imag for p in pts]
    lo = min(ys) / (1 + margin) / 2
    out = []
    for p in poles:
        out.extend(orbit_points_in_box(p, N, min(xs) - 1, max(xs) + 1, lo))
    return out


# ---------------------------------------------------------------------------
# paths and quadrature

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


@dataclass
class _Segment:
    z0: complex
    z1: complex

    def point(self, t):
        return self.z0 + (self.z1 - self.z0) * t

    def deriv(self, t):
        return np.full_like(np.asarray(t, dtype=complex), self.z1 - self.z0)


@dataclass
class _Arc:
    center: complex
    radius: float
    theta0: float
    theta1: float

    def point(self, t):
        th = self.theta0 + (self.theta1 - self.theta0) * np.asarray(t)
        return self.center + self.radius * np.exp(1j * th)

    def deriv(self, t):
        th = self.theta0 + (self.theta1 - self.theta0) * np.asarray(t)
        return 1j * self.radius * (self.theta1 - self.theta0) * np.exp(1j * th)


def plan_path(cycle: GeodesicCycle, poles=(), N: int = 1, detour_trigger: float = 0.1,
              detour_radius: float = 0.15, side: int = 0) -> list:
    """Pieces of a path from the base point to ``gamma`` applied to it.

    Poles of the orbit of ``poles`` closer than ``detour_trigger * Im(p)`` to a
    segment are bypassed on a circular arc of radius ``detour_radius * Im(p)``.
    ``side`` (+1 left, -1 right, 0 automatic) picks the side of the detour.
    """
    nodes = [cycle.base_point] + list(cycle.waypoints if cycle.path_policy == "custom_waypoints" else []) \
        + [cycle.endpoint]
    near = _poles_near(list(poles), N, nodes, detour_trigger)
    for p in near:
        if any(abs(p - z) < detour_radius * p.imag for z in (nodes[0], nodes[-1])):
            raise CycleError(f"an end point of the path lies within the detour radius of the pole {p}")
    pieces = []
    for z0, z1 in zip(nodes[:-1], nodes[1:]):
        pieces.extend(_segment_with_detours(z0, z1, near, detour_trigger, detour_radius, side))
    return pieces


def _segment_with_detours(z0, z1, poles, trigger, radius, side):
    L = abs(z1 - z0)
    u = (z1 - z0) / L
    hits = []
    for p in poles:
        s = ((p - z0) / u).real
        h = ((p - z0) / u).imag
        if -radius * p.imag < s < L + radius * p.imag and abs(h) < trigger * p.imag:
            hits.append((s, p, h))
    hits.sort(key=lambda x: x[0].real)
    pieces = []
    cur = z0
    for s, p, h in hits:
        r = radius * p.imag
        if abs(h) >= r:
            continue
        if any(abs(q - p) < 2 * r and q != p for q in poles):
            raise CycleError(f"poles near {p} are too close for a detour of radius {r}")
        # entry/exit points on the circle |z - p| = r along the line
        w = math.sqrt(r * r - h * h)
        a = z0 + u * (s - w)
        b = z0 + u * (s + w)
        th_a = cmath.phase(a - p)
        th_b = cmath.phase(b - p)
        sd = side
        if sd == 0:
            # leave the pole on the side it already lies
            sd = -1 if h > 0 else 1
        # sd = +1: arc to the left of the travel direction (counterclockwise around p when p on the right)
        dth = (th_b - th_a) % (2 * math.pi)
        if sd > 0:
            # the arc passing left of travel direction is the clockwise one around p
            dth = dth - 2 * math.pi if dth > 0 else dth
        else:
            dth = dth if dth > 0 else dth + 2 * math.pi
        if abs(a - cur) > 0:
            pieces.append(_Segment(cur, a))
        pieces.append(_Arc(p, r, th_a, th_a + dth))
        cur = b
    if abs(z1 - cur) > 0:
        pieces.append(_Segment(cur, z1))
    return pieces


def _gl(fn, piece, t0, t1):
    t = 0.5 * (t1 - t0) * _GL_NODES + 0.5 * (t1 + t0)
    z = piece.point(t)
    vals = np.array([fn(complex(zz)) for zz in z]) * piece.deriv(t)
    w = 0.5 * (t1 - t0) * _GL_WEIGHTS
    return complex(np.dot(w, vals)), float(np.dot(w, np.abs(vals)))


def integrate_path(fn, pieces, rtol: float = 1e-12, max_depth: int = 24) -> tuple[complex, float, float]:
    """Adaptive Gauss-Legendre over the pieces; returns ``(integral, error_estimate, abs_integral)``."""
    panels = []
    scale = 0.0
    for piece in pieces:
        for j in range(4):
            t0, t1 = j / 4, (j + 1) / 4
            v, a = _gl(fn, piece, t0, t1)
            panels.append((piece, t0, t1, v, 0))
            scale += a
    tol = rtol * max(scale, 1e-300)
    total, err = 0j, 0.0
    stack = panels
    while stack:
        piece, t0, t1, v, depth = stack.pop()
        tm = 0.5 * (t0 + t1)
        vl, _ = _gl(fn, piece, t0, tm)
        vr, _ = _gl(fn, piece, tm, t1)
        diff = abs(vl + vr - v)
        if diff <= tol * (t1 - t0) / max(len(pieces), 1) or diff <= 1e-15 * abs(v):
            total += vl + vr
            err += diff
        elif depth >= max_depth:
            raise ConvergenceError(f"quadrature did not converge on panel [{t0}, {t1}]", estimate=total, error=diff)
        else:
            stack.append((piece, t0, tm, vl, depth + 1))
            stack.append((piece, tm, t1, vr, depth + 1))
    return total, err, scale


@dataclass
class PairingResult:
    value: float
    projected: complex
    integral: complex
    error: float
    scale: float

    @property
    def magnitude(self) -> float:
        """``|(i/sqrt d)^(k-1) int f Q^(k-1) dz|``: the unprojected size the real part is compared with."""
        return abs(self.projected)

    def to_dict(self) -> dict:
        return {"value": self.value, "projected": [self.projected.real, self.projected.imag],
                "integral": [self.integral.real, self.integral.imag], "error": self.error, "scale": self.scale}


def _divisor_points(divisor):
    if divisor is None:
        return [], 1
    if hasattr(divisor, "points"):
        pts = divisor.points
        pts = pts() if callable(pts) else pts
        return [complex(p[0]) if isinstance(p, tuple) else complex(p) for p in pts], divisor.N
    poles, N = divisor
    return [complex(p) for p in poles], int(N)


def pairing(evaluator, cycle: GeodesicCycle, k: int, divisor=None, rtol: float = 1e-12,
            detour_radius: float = 0.15, side: int = 0) -> PairingResult:
    """Cycle pairing of a weight ``2k`` form.

    ``divisor`` is a :class:`~maass_periods.qf.HeegnerDivisor` or a pair
    ``(points, N)`` of pole representatives; their orbits are avoided.
    """
    poles, N = _divisor_points(divisor)
    pieces = plan_path(cycle, poles, N, detour_radius=detour_radius, side=side)
    A, B, C = cycle.Q
    km1 = k - 1

    def integrand(z):
        return evaluator(z) * (A * z * z + B * z + C) ** km1

    I, err, scale = integrate_path(integrand, pieces, rtol)
    pref = (1j / math.sqrt(cycle.d_gamma)) ** km1
    proj = pref * I
    return PairingResult(float(proj.real), complex(proj), complex(I), float(abs(pref) * err),
                         float(abs(pref) * scale))


def loop_prediction(cycle: GeodesicCycle, k: int, pole: complex, a: float) -> complex:
    """``int`` of ``f Q_gamma^(k-1)`` over a counterclockwise loop around ``pole`` where
    ``f = a Q_pole(z)^-k + O(1)``: ``pi / Im(p) * a (2 i Im p)^k * c_Q(k-1)``."""
    y = pole.imag
    return math.pi / y * a * (2j * y) ** k * elliptic_coeff_Q(cycle.gamma, pole, k)


def _winding(pieces, p: complex) -> int:
    total = 0.0
    for piece in pieces:
        t = np.linspace(0, 1, 400)
        z = piece.point(t)
        ang = np.unwrap(np.angle(z - p))
        total += ang[-1] - ang[0]
    return int(round(total / (2 * math.pi)))


def path_independence_check(evaluator, cycle: GeodesicCycle, k: int, divisor, cycle2: GeodesicCycle | None = None,
                            side1: int = 0, side2: int = 0, residues: dict | None = None, rtol: float = 1e-12):
    """Pair along two paths; return both results and the residue-theorem prediction of the jump.

    The second path is ``cycle2`` (same matrix, different waypoints) or the same
    path with detours on ``side2``.  ``residues`` maps pole representatives to
    their local coefficients ``a``; all orbit points enclosed between the two
    paths contribute.
    """
    cycle2 = cycle if cycle2 is None else cycle2
    if cycle2.gamma != cycle.gamma or abs(cycle2.base_point - cycle.base_point) > 0:
        raise CycleError("the two paths must share matrix and base point")
    r1 = pairing(evaluator, cycle, k, divisor, rtol, side=side1)
    r2 = pairing(evaluator, cycle2, k, divisor, rtol, side=side2)
    predicted = 0j
    if residues:
        poles, N = _divisor_points(divisor)
        p1 = plan_path(cycle, poles, N, side=side1)
        p2 = plan_path(cycle2, poles, N, side=side2)
        # closed loop: path 1 followed by path 2 reversed
        loop = p1 + [_Reversed(p) for p in reversed(p2)]
        nodes = [cycle.base_point, cycle.endpoint] + list(cycle.waypoints) + list(cycle2.waypoints)
        for rep, a in residues.items():
            for q in _poles_near([rep], N, nodes, 0.5):
                w = _winding(loop, q)
                if w:
                    predicted += w * loop_prediction(cycle, k, q, a)
    pref = (1j / math.sqrt(cycle.d_gamma)) ** (k - 1)
    # projected(1) - projected(2) = pref * loop integral
    return r1, r2, complex(pref * predicted)


@dataclass
class _Reversed:
    piece: object

    def point(self, t):
        return self.piece.point(1 - np.asarray(t))

    def deriv(self, t):
        return -self.piece.deriv(1 - np.asarray(t))


# ---------------------------------------------------------------------------
# elliptic expansions


def elliptic_coeff_Q(gamma, rho: complex, k: int) -> float:
    """Index ``k-1`` coefficient of ``Q_gamma(z,1)^(k-1)`` in its weight ``2-2k`` expansion at ``rho``:
    ``(-4 Im rho)^(1-k) (2 i sqrt d)^(k-1) P_{k-1}(i (A|rho|^2 + B Re rho + C) / (Im rho sqrt d))``."""
    a, b, c, d = gamma
    A, B, C = c, d - a, -b
    dg = (a + d) ** 2 - 4
    if dg <= 0:
        raise CycleError("gamma must be hyperbolic")
    y = rho.imag
    sd = math.sqrt(dg)
    arg = 1j * (A * abs(rho) ** 2 + B * rho.real + C) / (y * sd)
    val = (-4 * y) ** (1 - k) * (2j * sd) ** (k - 1) * complex(legendre_P(k - 1, arg))
    if abs(val.imag) > 1e-12 * max(1.0, abs(val)):
        raise ConvergenceError("elliptic coefficient is not real", estimate=val, error=abs(val.imag))
    return float(val.real)


def elliptic_coeff_numeric(fn, rho: complex, weight: int, n: int, radius: float = 0.3, samples: int = 64) -> complex:
    """Coefficient ``c(n)`` of ``fn(z) = (z - conj rho)^(-weight) sum c(n) X^n`` by a contour average."""
    theta = 2 * math.pi * np.arange(samples) / samples
    X = radius * np.exp(1j * theta)
    z = (rho - rho.conjugate() * X) / (1 - X)
    vals = np.array([fn(complex(zz)) for zz in z]) * (z - rho.conjugate()) ** weight
    return complex(np.mean(vals * X ** (-n)))


def elliptic_coeff_Q_raising(gamma, rho: complex, k: int, h: float = 1e-2) -> tuple[complex, float]:
    """Finite-difference version: ``(-4 Im rho)^(1-k) / (k-1)! * R_{2-2k}^{k-1}(Q^(k-1))(rho)``."""
    a, b, c, d = gamma
    A, B, C = c, d - a, -b
    fn = lambda z: (A * z * z + B * z + C) ** (k - 1)
    val, err = raising_numeric(fn, 2 - 2 * k, k - 1, rho, h)
    s = (-4 * rho.imag) ** (1 - k) / math.factorial(k - 1)
    return complex(s * val), float(abs(s) * err)


# ---------------------------------------------------------------------------
# iterated raising of the hypergeometric kernel


def raising_hypergeometric_check(k: int, N: int, m: float, X, z: complex, h: float = 2e-3):
    """Both sides of ``R_0^k(w^(k/2) 2F1(k/2, (k+1)/2; k+1/2; w)) = Gamma(2k)/Gamma(k) (sqrt(4N|m|) sgn(p_z(X)) / Q_X(z))^k``
    with ``w = 2|m| / p_z(X)^2``; left side by nested finite differences.

    ``X`` is a :class:`~maass_periods.qf.LatticeVector` with ``q(X) = m < 0``.
    Returns ``(lhs, rhs, error_estimate)``.
    """
    if m >= 0:
        raise ValueError("m must be negative")
    if abs(float(X.q) - m) > 1e-12 * max(1, abs(m)):
        raise ValueError(f"q(X) = {X.q} does not equal m = {m}")
    z = complex(z)

    def w_of(zz):
        p = X.p_z(zz)
        if p == 0:
            raise ValueError("p_z(X) vanishes")
        return 2 * abs(m) / (p * p)

    w0 = w_of(z)
    if not 0 < w0 < 1:
        raise ValueError(f"w = {w0} lies outside (0, 1)")

    def lhs_fn(zz):
        w = w_of(zz)
        if not 0 < w < 1:
            raise ValueError(f"w = {w} left (0, 1) during differencing")
        return w ** (k / 2) * hyp2f1(k / 2, (k + 1) / 2, k + 0.5, w)

    lhs, err = raising_numeric(lhs_fn, 0, k, z, h)
    sgn = 1.0 if X.p_z(z) > 0 else -1.0
    rhs = math.gamma(2 * k) / math.gamma(k) * (math.sqrt(4 * N * abs(m)) * sgn / X.Q_of_z(z)) ** k
    lhs = complex(lhs)
    if not np.isfinite(lhs):
        raise ConvergenceError("finite differences produced a non-finite value", estimate=lhs)
    return lhs, complex(rhs), float(err)
