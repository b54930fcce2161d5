"""The curves S_p: charts, centers, parameter rays and their landing maps.

S_1 is the t-plane with (a, v) = (t, t).  S_2 is the punctured t-plane with
s = 1/(3t), a = -(s^2+1)/(3s), v = a + s; its two escape regions surround
t = infinity (outer, kneading 00) and t = 0 (inner, kneading 10).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np
import sympy as sp

from .dynamics import (
    TWO_PI,
    CubicMap,
    _log_bottcher_direct,
    depth_for,
    newton_periodic,
    periodic_points,
)
from .errors import (
    ChartUnavailable,
    ContinuationLost,
    DegreeTooLarge,
    DomainError,
    NewtonDivergence,
    NotACenter,
    RegionEscape,
    VerificationFailed,
    ZeroParameter,
)
from .exact_angles import Angle, AngleLike, as_angle, co_period, period_under_tripling
from .rootfind import aberth, dedup, poly_roots

DEDUP = 1e-8


# --- charts -------------------------------------------------------------------

def s1_map(t: complex) -> CubicMap:
    t = complex(t)
    return CubicMap(t, t)


def s2_map(t: complex) -> CubicMap:
    t = complex(t)
    if t == 0:
        raise ZeroParameter("t = 0 is the ideal point of the inner region")
    s = 1.0 / (3.0 * t)
    a = -(s * s + 1.0) / (3.0 * s)
    return CubicMap(a, a + s)


def chart(p: int) -> Callable[[complex], CubicMap]:
    if p == 1:
        return s1_map
    if p == 2:
        return s2_map
    raise ChartUnavailable(f"no explicit parametrization of S_{p}")


def chart_inverse(F: CubicMap, p: int) -> complex:
    if p == 1:
        return F.a
    if p == 2:
        return 1.0 / (3.0 * (F.v - F.a))
    raise ChartUnavailable(f"no explicit parametrization of S_{p}")


def period_residual(F: CubicMap, p: int) -> float:
    return abs(F.iterate(F.a, p) - F.a)


# --- escape regions -------------------------------------------------------------

@dataclass(frozen=True)
class EscapeRegionRef:
    p: int
    kneading: tuple[int, ...]
    mu: int = 1
    name: str = ""

    def __post_init__(self):
        if self.mu < 1 or self.mu & (self.mu - 1):
            raise DomainError("multiplicity must be a power of two")


S1_REGION = EscapeRegionRef(1, (0,), 1, "s1")
OUTER = EscapeRegionRef(2, (0, 0), 1, "outer")
INNER = EscapeRegionRef(2, (1, 0), 1, "inner")
REGIONS = {"s1": S1_REGION, "outer": OUTER, "inner": INNER}


def region_named(name: str) -> EscapeRegionRef:
    try:
        return REGIONS[name]
    except KeyError:
        raise DomainError(f"unknown region {name!r}; choose from {sorted(REGIONS)}") from None


def region_of_t(t: complex, p: int) -> EscapeRegionRef:
    """Which ideal point's region a chart point is nearer to (used only for labels)."""
    if p == 1:
        return S1_REGION
    return OUTER if abs(t) > 1.0 / 3.0 else INNER


def asymptotic_seed(region: EscapeRegionRef, G: float, phi: float) -> complex:
    """Chart point with B(2a) close to exp(G + 2πiφ), using B(2a) ~ 4^{1/3} a."""
    a = cmath.exp(complex(G, TWO_PI * phi)) / 4.0 ** (1.0 / 3.0)
    if region.p == 1:
        return a
    # a = -t - 1/(9t)  <=>  9t^2 + 9at + 1 = 0
    disc = cmath.sqrt(81.0 * a * a - 36.0)
    r1, r2 = (-9.0 * a + disc) / 18.0, (-9.0 * a - disc) / 18.0
    big, small = (r1, r2) if abs(r1) >= abs(r2) else (r2, r1)
    return big if region == OUTER else small


# --- parameter rays -----------------------------------------------------------------

class LandingKind(str, Enum):
    PARABOLIC = "Parabolic"
    MISIUREWICZ = "Misiurewicz"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Landing:
    kind: LandingKind
    t: Optional[complex] = None
    ray_period: Optional[int] = None
    preperiod: Optional[int] = None
    period: Optional[int] = None
    point: Optional[complex] = None
    multiplier: Optional[complex] = None
    endpoint_distance: Optional[float] = None

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.t is not None:
            out["t"] = [self.t.real, self.t.imag]
        for key in ("ray_period", "preperiod", "period", "endpoint_distance"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        if self.point is not None:
            out["point"] = [self.point.real, self.point.imag]
        if self.multiplier is not None:
            out["multiplier"] = [self.multiplier.real, self.multiplier.imag]
        return out


@dataclass
class ParameterRay:
    region: EscapeRegionRef
    phi: Angle
    samples: list[tuple[float, complex]] = field(default_factory=list)
    landing: Optional[Landing] = None

    @property
    def endpoint(self) -> complex:
        return self.samples[-1][1]

    def map_at(self, i: int = -1) -> CubicMap:
        return chart(self.region.p)(self.samples[i][1])

    def to_json(self) -> dict:
        out = {
            "region": self.region.name,
            "p": self.region.p,
            "phi": str(self.phi),
            "samples": [],
        }
        for g, t in self.samples:
            F = chart(self.region.p)(t)
            out["samples"].append({"G": g, "t": [t.real, t.imag],
                                   "a": [F.a.real, F.a.imag], "v": [F.v.real, F.v.imag]})
        if self.landing is not None:
            out["landing"] = self.landing.to_json()
        return out


def _wrap(x: float) -> float:
    return (x + math.pi) % TWO_PI - math.pi


def _log_b_cocritical(F: CubicMap, k: int) -> complex:
    return _log_bottcher_direct(F, F.iterate(2.0 * F.a, k))


def ray_equation(region: EscapeRegionRef, G: float, phi: Fraction, k: int) -> Callable[[complex], complex]:
    """H(t) = log B(F^k(2a)) - 3^k(G + 2πiφ), argument wrapped to (-π, π]."""
    mapper = chart(region.p)
    arg = TWO_PI * float((phi * 3**k * region.mu) % 1)

    def H(t: complex) -> complex:
        L = _log_b_cocritical(mapper(t), k)
        return complex(L.real - 3.0**k * G, _wrap(L.imag - arg))

    return H


def _fd_derivative(H: Callable[[complex], complex], t: complex,
                   scale: float = math.inf) -> complex:
    # scale: length over which H is known to be smooth (e.g. the last step)
    h = max(min(1e-7 * max(abs(t), 1e-3), 1e-2 * scale), 1e-11 * max(abs(t), 1e-3))
    return (H(t + h) - H(t - h)) / (2.0 * h)


def _ray_tol(k: int) -> float:
    return max(1e-11, 64.0 * 3.0**k * 2.2e-16)


def _newton_on_ray(H: Callable[[complex], complex], t: complex, k: int,
                   maxit: int = 40, scale: float = math.inf) -> complex:
    tol = _ray_tol(k)
    for _ in range(maxit):
        val = H(t)
        if abs(val) <= tol:
            return t
        d = _fd_derivative(H, t, scale)
        if d == 0 or not cmath.isfinite(d):
            raise NewtonDivergence("degenerate derivative on the parameter ray")
        t = t - val / d
    if abs(H(t)) <= 1e3 * tol:
        return t
    raise NewtonDivergence("parameter-ray Newton did not converge")


def trace_parameter_ray(region: Union[EscapeRegionRef, str], phi: AngleLike,
                        G_start: float = 3.0, G_min: float = 1e-5,
                        seed: Optional[complex] = None, *,
                        max_log_step: float = math.log(3.0) / 8.0,
                        verify_region: bool = False) -> ParameterRay:
    """Continue the parameter ray of angle phi from potential G_start down to G_min."""
    if isinstance(region, str):
        region = region_named(region)
    if region.mu != 1:
        raise DomainError("tracing is limited to escape regions of multiplicity one")
    phi = as_angle(phi)
    mapper = chart(region.p)
    t = asymptotic_seed(region, G_start, float(phi)) if seed is None else complex(seed)
    k = depth_for(mapper(t), G_start)
    t = _newton_on_ray(ray_equation(region, G_start, phi.fraction, k), t, k)
    if verify_region:
        from .rays import kneading_invariant

        kn = kneading_invariant(mapper(t), float(phi), region.p, cross_check=False)
        if kn.bits != region.kneading:
            raise RegionEscape(f"seed lies in the region with kneading {kn}")
    ray = ParameterRay(region, phi, [(G_start, t)])
    G, h, last = G_start, max_log_step, math.inf
    while G > G_min * (1 + 1e-12):
        Gn = max(G * math.exp(-h), G_min)
        F = mapper(t)
        k = depth_for(F, Gn)
        H = ray_equation(region, Gn, phi.fraction, k)
        # dt/dG from H(t, G) = 0 at the current point: H_t dt = 3^k dG.
        Hc = ray_equation(region, G, phi.fraction, k)
        d = _fd_derivative(Hc, t, last)
        seed_t = t + (3.0**k * (Gn - G)) / d
        ok = False
        try:
            nxt = _newton_on_ray(H, seed_t, k, scale=last)
            # Newton only pins t down to about tol / |H'|.
            noise = 4.0 * _ray_tol(k) / abs(d) + 1e-13 * max(1.0, abs(t))
            ok = abs(nxt - seed_t) <= 0.25 * abs(seed_t - t) + noise
        except (NewtonDivergence, ZeroParameter, OverflowError, ZeroDivisionError):
            pass
        if not ok:
            h *= 0.5
            if h < 1e-8:
                raise NewtonDivergence(f"parameter ray {phi} stalled at G = {G:.4g}")
            continue
        last = abs(nxt - t)
        t, G = nxt, Gn
        ray.samples.append((G, t))
        h = min(max_log_step, 1.5 * h)
    return ray


# --- landing classification ------------------------------------------------------

def angle_tail(phi: Angle) -> tuple[int, int]:
    """(preperiod, period) of phi under tripling."""
    seen = {}
    x, n = phi, 0
    while x not in seen:
        seen[x] = n
        x = x * 3
        n += 1
    return seen[x], n - seen[x]


def _newton2(fun: Callable[[np.ndarray], np.ndarray], x: np.ndarray, tol: float = 1e-13,
             maxit: int = 60) -> np.ndarray:
    """Newton in C^n with a finite-difference Jacobian."""
    x = np.array(x, dtype=complex)
    for _ in range(maxit):
        f = fun(x)
        if np.max(np.abs(f)) <= tol:
            return x
        J = np.empty((len(f), len(x)), dtype=complex)
        for j in range(len(x)):
            h = 1e-7 * max(abs(x[j]), 1e-3)
            e = np.zeros(len(x), dtype=complex)
            e[j] = h
            J[:, j] = (fun(x + e) - fun(x - e)) / (2 * h)
        try:
            dx = np.linalg.solve(J, f)
        except np.linalg.LinAlgError as exc:
            raise NewtonDivergence("singular Jacobian") from exc
        x = x - dx
        if np.max(np.abs(dx)) <= 1e-15 * max(1.0, np.max(np.abs(x))):
            return x
    if np.max(np.abs(fun(x))) <= 1e4 * tol:
        return x
    raise NewtonDivergence("Newton did not converge")


def _ray_period_of_point(F: CubicMap, z: complex, q: int, tol: float = 1e-6) -> int:
    """Exact period times the rotation order of a parabolic point."""
    m = next((m for m in range(1, q + 1) if abs(F.iterate(z, m) - z) <= tol * max(1.0, abs(z))), 0)
    if m == 0:
        return 0
    lam = F.iterate_with_derivative(z, m)[1]
    for r in range(1, 13):
        if abs(lam**r - 1.0) <= 1e-4 * r:
            return m * r
    return 0


def polish_parabolic(p: int, t0: complex, q: int, z0: complex) -> tuple[complex, complex]:
    """Solve F_t^q(z) = z, (F_t^q)'(z) = 1 in (t, z)."""
    mapper = chart(p)

    def fun(x: np.ndarray) -> np.ndarray:
        F = mapper(x[0])
        w, d = F.iterate_with_derivative(x[1], q)
        return np.array([w - x[1], d - 1.0])

    x = _newton2(fun, np.array([t0, z0]))
    return complex(x[0]), complex(x[1])


def _parabolic_candidates(F: CubicMap, q: int) -> list[tuple[complex, complex]]:
    """Fixed points of F^q ordered by |multiplier of F^q - 1|."""
    out = []
    for m in range(1, q + 1):
        if q % m:
            continue
        for P in periodic_points(F, m):
            lam_q = P.multiplier ** (q // m)
            out.append((P.z, lam_q))
    out.sort(key=lambda zl: abs(zl[1] - 1.0))
    return out


def polish_misiurewicz(p: int, t0: complex, pre: int, per: int) -> complex:
    """Solve F_t^{pre+per}(2a) = F_t^{pre}(2a) near t0."""
    mapper = chart(p)

    def fun(x: np.ndarray) -> np.ndarray:
        F = mapper(x[0])
        w = F.iterate(2.0 * F.a, pre)
        return np.array([F.iterate(w, per) - w])

    return complex(_newton2(fun, np.array([t0]))[0])


def parabolic_landings(p: int, t_end: complex, q: int) -> list[tuple[complex, complex, complex]]:
    """Distinct parabolic maps of ray period q reached by polishing from t_end.

    Each fixed point of F^q for the endpoint map seeds a Newton solve of the
    parabolic system; returns (t, parabolic point, multiplier) sorted by
    distance from t_end.
    """
    mapper = chart(p)
    F_end = mapper(t_end)
    found: list[tuple[complex, complex, complex]] = []
    for z0, _lam in _parabolic_candidates(F_end, q):
        try:
            t_star, z_star = polish_parabolic(p, t_end, q, z0)
        except (NewtonDivergence, ZeroParameter, np.linalg.LinAlgError):
            continue
        if not (cmath.isfinite(t_star) and cmath.isfinite(z_star)):
            continue
        if any(abs(t_star - t) <= 1e-7 * max(1.0, abs(t)) for t, _, _ in found):
            continue
        F_star = mapper(t_star)
        if _ray_period_of_point(F_star, z_star, q) != q:
            continue
        lam = F_star.iterate_with_derivative(z_star, q)[1]
        found.append((t_star, z_star, lam))
    found.sort(key=lambda x: abs(x[0] - t_end))
    return found


def classify_landing(ray: ParameterRay, *, land_tol: float = 0.15,
                     multiplier_tol: float = 0.1, separation: float = 1.5) -> Landing:
    """Parabolic or Misiurewicz landing predicted by the angle, confirmed numerically.

    Parabolic landings converge too slowly to read off the endpoint, so the
    landing map is the nearest solution of the parabolic system with the
    predicted ray period; it must be clearly nearer than any other.
    """
    p = ray.region.p
    phi = ray.phi
    t_end = ray.endpoint
    scale = max(1.0, abs(t_end))
    q = co_period(phi)
    mapper = chart(p)
    if q is not None:
        found = parabolic_landings(p, t_end, q)
        if not found:
            raise VerificationFailed(f"no parabolic map of ray period {q} near the end of ray {phi}")
        t_star, z_star, lam = found[0]
        dist = abs(t_star - t_end)
        if dist > land_tol * scale:
            raise VerificationFailed(f"nearest parabolic map is {dist:.3g} from the end of ray {phi}")
        if len(found) > 1 and abs(found[1][0] - t_end) < separation * dist:
            raise VerificationFailed(f"ambiguous parabolic landing for ray {phi}")
        if abs(lam - 1.0) > multiplier_tol:
            raise VerificationFailed("polished multiplier is not close to 1")
        return Landing(LandingKind.PARABOLIC, t=t_star, ray_period=q, point=z_star,
                       multiplier=lam, endpoint_distance=dist)
    if phi.den % 3 == 0 or period_under_tripling(phi) is not None:
        pre, per = angle_tail(phi)
        try:
            t_star = polish_misiurewicz(p, t_end, pre, per)
        except (NewtonDivergence, ZeroParameter) as exc:
            raise VerificationFailed(str(exc)) from exc
        dist = abs(t_star - t_end)
        F = mapper(t_star)
        z = F.iterate(2.0 * F.a, pre)
        lam = F.iterate_with_derivative(z, per)[1]
        if dist > land_tol * scale or abs(lam) <= 1.0:
            raise VerificationFailed(f"Misiurewicz polish for ray {phi} does not match")
        if pre > 0:
            w = F.iterate(2.0 * F.a, pre - 1)
            if abs(F.iterate(w, per) - w) <= 1e-8 * max(1.0, abs(w)):
                raise VerificationFailed("preperiod is smaller than predicted")
        # Preperiod and period of the free critical point -a, whose first image is F(2a).
        return Landing(LandingKind.MISIUREWICZ, t=t_star, preperiod=max(pre, 1), period=per,
                       point=z, multiplier=lam, endpoint_distance=dist)
    return Landing(LandingKind.UNKNOWN)


# --- centers ----------------------------------------------------------------------

class CenterKind(str, Enum):
    A = "A"
    B = "B"
    D = "D"


@dataclass(frozen=True)
class CenterSpec:
    kind: CenterKind
    m: int = 0
    n: int = 0
    q: int = 0

    @classmethod
    def parse(cls, text: str) -> "CenterSpec":
        text = text.strip().upper()
        if text == "A":
            return cls(CenterKind.A)
        if text.startswith("B:"):
            m, n = (int(x) for x in text[2:].split(","))
            return cls(CenterKind.B, m=m, n=n)
        if text.startswith("D:"):
            return cls(CenterKind.D, q=int(text[2:]))
        raise DomainError(f"bad center kind {text!r}; use A, B:m,n or D:q")


_a, _v, _t = sp.symbols("a v t")


def _sym_iterate(a, v, z, n):
    for _ in range(n):
        z = sp.expand(z**3 - 3 * a**2 * z + 2 * a**3 + v)
    return z


def _roots_of(expr, var) -> list[complex]:
    """Distinct roots of a polynomial, factor by factor."""
    poly = sp.Poly(sp.expand(expr), var)
    if poly.degree() <= 0:
        return []
    out = []
    for fac, _mult in sp.factor_list(poly)[1]:
        coeffs = [complex(c) for c in sp.Poly(fac, var).all_coeffs()]
        if len(coeffs) == 2:
            out.append(-coeffs[1] / coeffs[0])
        else:
            out.extend(complex(r) for r in poly_roots(coeffs))
    return out


def _on_orbit(F: CubicMap, start: complex, target: complex, steps: int, tol: float = 1e-6) -> bool:
    z = start
    for _ in range(steps):
        z = F(z)
        if abs(z - target) <= tol * max(1.0, abs(target)):
            return True
    return False


def _exact_period(F: CubicMap, z: complex, n: int, tol: float = 1e-7) -> int:
    for m in range(1, n + 1):
        if abs(F.iterate(z, m) - z) <= tol * max(1.0, abs(z)):
            return m
    return 0


def _polish_center(F: CubicMap, eqs: Callable[[CubicMap], list[complex]]) -> CubicMap:
    def fun(x):
        return np.array(eqs(CubicMap(x[0], x[1])))

    x = _newton2(fun, np.array([F.a, F.v]), tol=1e-14)
    return CubicMap(x[0], x[1])


def find_centers(p: int, kind: Union[CenterSpec, str]) -> list[CubicMap]:
    """Centers of hyperbolic components of the given type, sorted by (re a, im a)."""
    if isinstance(kind, str):
        kind = CenterSpec.parse(kind)
    if kind.kind is CenterKind.A:
        out = _centers_a(p)
    elif kind.kind is CenterKind.B:
        out = _centers_b(kind.m, kind.n)
    else:
        out = _centers_d(p, kind.q)
    out = [CubicMap(_snap(F.a), _snap(F.v)) for F in out]
    out.sort(key=lambda F: (round(F.a.real, 9), round(F.a.imag, 9), round(F.v.real, 9),
                            round(F.v.imag, 9)))
    return out


def _snap(z: complex, rel: float = 1e-14) -> complex:
    # root finders leave ~1e-45 imaginary parts on real centers
    eps = rel * max(1.0, abs(z))
    return complex(0.0 if abs(z.real) <= eps else z.real, 0.0 if abs(z.imag) <= eps else z.imag)


def _centers_a(p: int) -> list[CubicMap]:
    if p > 4:
        raise DegreeTooLarge("Type A centers are enumerated for p <= 4")
    expr = _sym_iterate(0, _v, sp.Integer(0), p)
    out = []
    for v in dedup(_roots_of(expr, _v), DEDUP):
        F = CubicMap(0, _polish_v_a(v, p))
        if _exact_period(F, 0j, p) == p:
            out.append(F)
    return out


def _polish_v_a(v: complex, p: int) -> complex:
    for _ in range(50):
        z, dz = 0j, 0j
        for _ in range(p):
            z, dz = z**3 + v, 3 * z * z * dz + 1.0
        if dz == 0:
            break
        step = z / dz
        v -= step
        if abs(step) < 1e-16 * max(1.0, abs(v)):
            break
    return v


def _centers_b(m: int, n: int) -> list[CubicMap]:
    if m < 1 or n < 1:
        raise DomainError("B(m,n) needs m, n >= 1")
    if m + n > 4:
        raise DegreeTooLarge("Type B centers are enumerated for m + n <= 4")
    e1 = _sym_iterate(_a, _v, _a, m) + _a
    e2 = _sym_iterate(_a, _v, -_a, n) - _a
    pairs: list[tuple[complex, complex]] = []
    if m == 1:
        for a in _roots_of(e2.subs(_v, -_a), _a):
            pairs.append((a, -a))
    elif n == 1:
        for a in _roots_of(e1.subs(_v, _a - 4 * _a**3), _a):
            pairs.append((a, a - 4 * a**3))
    else:
        res = sp.resultant(sp.Poly(e1, _v), sp.Poly(e2, _v))
        for a in dedup(_roots_of(res.as_expr(), _a), DEDUP):
            coeffs = [complex(c) for c in sp.Poly(e1.subs(_a, a), _v).all_coeffs()]
            for v in poly_roots(coeffs):
                if abs(complex(CubicMap(a, v).iterate(-a, n)) - a) <= 1e-6 * max(1.0, abs(a)):
                    pairs.append((a, v))

    def eqs(F: CubicMap) -> list[complex]:
        return [F.iterate(F.a, m) + F.a, F.iterate(-F.a, n) - F.a]

    out = []
    for a, v in pairs:
        if abs(a) < 1e-6:
            continue
        try:
            F = _polish_center(CubicMap(a, v), eqs)
        except NewtonDivergence:
            continue
        if any(abs(F.a - G.a) <= DEDUP and abs(F.v - G.v) <= DEDUP for G in out):
            continue
        # Exact bi-period: neither critical point meets {a, -a} early.
        if _first_hit(F, F.a, m) != m or _first_hit(F, -F.a, n) != n:
            continue
        out.append(F)
    return out


def _first_hit(F: CubicMap, z: complex, limit: int, tol: float = 1e-7) -> int:
    for j in range(1, limit + 1):
        z = F(z)
        if min(abs(z - F.a), abs(z + F.a)) <= tol * max(1.0, abs(F.a)):
            return j
    return 0


def _chart_jet(p: int, t: np.ndarray):
    """(a, a', v, v') along the chart as functions of t."""
    if p == 1:
        one = np.ones_like(t)
        return t, one, t, one
    # a = -t - 1/(9t), v = a + 1/(3t)
    a = -t - 1.0 / (9.0 * t)
    da = -1.0 + 1.0 / (9.0 * t * t)
    return a, da, a + 1.0 / (3.0 * t), da - 1.0 / (3.0 * t * t)


def _d_ratio(p: int, q: int):
    """Newton ratio N/N' of N(t) = t^M (F_t^q(-a) + a), the polynomial whose roots are D candidates."""
    M = 0 if p == 1 else 3**q

    def ratio(t: np.ndarray) -> np.ndarray:
        a, da, v, dv = _chart_jet(p, t)
        z, dz = -a, -da
        c1, dc1 = -3.0 * a * a, -6.0 * a * da
        c0, dc0 = 2.0 * a**3 + v, 6.0 * a * a * da + dv
        for _ in range(q):
            z, dz = z**3 + c1 * z + c0, (3.0 * z * z + c1) * dz + dc1 * z + dc0
        f, df = z + a, dz + da
        with np.errstate(all="ignore"):
            return 1.0 / (M / t + df / f)

    return ratio, (1 if p == 1 else 2) * 3**q


def _centers_d(p: int, q: int) -> list[CubicMap]:
    if p not in (1, 2):
        raise ChartUnavailable("Type D centers are enumerated on S_1 and S_2 only")
    if p + q > 6:
        raise DegreeTooLarge("Type D centers are enumerated for p + q <= 6")
    ratio, deg = _d_ratio(p, q)
    roots = aberth(ratio, deg, 1.0, tol=1e-13, maxit=4000)
    mapper = chart(p)
    out = []
    for t in dedup(roots, DEDUP):
        if abs(t) < 1e-10:
            continue
        t = _polish_d(mapper, t, q)
        F = mapper(t)
        if abs(F.a) < 1e-7:
            continue
        if _exact_period(F, -F.a, q) != q or _exact_period(F, F.a, p) != p:
            continue
        if _on_orbit(F, -F.a, F.a, q):
            continue
        if any(abs(F.a - G.a) <= DEDUP and abs(F.v - G.v) <= DEDUP for G in out):
            continue
        out.append(F)
    return out


def _polish_d(mapper, t: complex, q: int) -> complex:
    def fun(x):
        F = mapper(x[0])
        return np.array([F.iterate(-F.a, q) + F.a])
    try:
        return complex(_newton2(fun, np.array([t]), tol=1e-14)[0])
    except NewtonDivergence:
        return t


def expected_center_count(p: int, kind: CenterSpec) -> int:
    from .combinatorics import degree

    if kind.kind is CenterKind.A:
        return degree(p)
    if kind.kind is CenterKind.B:
        return degree(kind.m + kind.n)
    q = kind.q
    return 3 * degree(p) ** 2 - p * degree(p) if p == q else 3 * degree(q) * degree(p)


# --- duality and the Misiurewicz coordinate -------------------------------------------

def dual_point(F: CubicMap, p: int, q: int, tol: float = 1e-8) -> CubicMap:
    """(a', v') = (-a, F(-a)) for a map whose two critical points are periodic."""
    if abs(F.iterate(F.a, p) - F.a) > tol * max(1.0, abs(F.a)):
        raise NotACenter(f"a is not periodic of period {p}")
    if abs(F.iterate(-F.a, q) + F.a) > tol * max(1.0, abs(F.a)):
        raise NotACenter(f"-a is not periodic of period {q}")
    return CubicMap(-F.a, F(-F.a))


def misiurewicz_tail(F: CubicMap, max_pre: int = 6, max_per: int = 6,
                     tol: float = 1e-4) -> tuple[int, int]:
    """Smallest (preperiod, period) with F^{l+r}(2a) close to F^l(2a)."""
    best = None
    for l in range(0, max_pre + 1):
        w = F.iterate(2.0 * F.a, l)
        for r in range(1, max_per + 1):
            err = abs(F.iterate(w, r) - w) / max(1.0, abs(w))
            if err <= tol:
                return l, r
            if best is None or err < best[0]:
                best = (err, l, r)
    raise NotACenter("2a is not (numerically) preperiodic")


def misiurewicz_coordinate(F0: CubicMap, F: CubicMap, tail: Optional[tuple[int, int]] = None,
                           radius: float = 0.1) -> complex:
    """s(F) = 2a_F - z(F), z(F) the continuation of the preperiodic point 2a_{F0}."""
    l, r = tail if tail is not None else misiurewicz_tail(F0)
    z = 2.0 * F0.a
    if l == 0:
        z = newton_periodic(F0, z, r)
    z0 = z
    for _ in range(60):
        w, dw = F.iterate_with_derivative(z, l)
        u, du = F.iterate_with_derivative(w, r)
        g = u - w
        dg = du * dw - dw
        if dg == 0:
            raise ContinuationLost("degenerate preperiodic point")
        step = g / dg
        z -= step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    w = F.iterate(z, l)
    if abs(F.iterate(w, r) - w) > 1e-9 * max(1.0, abs(w)) or abs(z - z0) > radius:
        raise ContinuationLost("preperiodic point could not be continued")
    return 2.0 * F.a - z


def landing_family(region: Union[EscapeRegionRef, str], phi: AngleLike,
                   G_min: float = 1e-5) -> tuple[Callable[[float], CubicMap], Landing]:
    """Maps t0 + sigma^2 u through the parabolic landing map t0 of a parameter ray.

    u points back against the ray's final direction, away from the ray on
    which the twin dynamic rays crash.  Parabolic points split like the
    square root of the parameter, so sigma is the natural parameter.
    """
    if isinstance(region, str):
        region = region_named(region)
    ray = trace_parameter_ray(region, phi, G_min=G_min)
    landing = classify_landing(ray)
    if landing.kind is not LandingKind.PARABOLIC:
        raise VerificationFailed(f"ray {phi} does not land at a parabolic map")
    t0 = landing.t
    back = t0 - ray.endpoint
    u = back / abs(back)
    mapper = chart(region.p)

    def family(sigma: float) -> CubicMap:
        return mapper(t0 + sigma * sigma * u)

    return family, landing
