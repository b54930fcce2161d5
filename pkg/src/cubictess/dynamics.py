"""A single cubic map F(z) = z^3 - 3a^2 z + 2a^3 + v.

Green's function, Böttcher coordinate, periodic points and the fate of the
free critical point -a.  The Böttcher coordinate is evaluated directly by
its product formula far out, and by following the gradient line of the
Green's function outward (with pullback Newton steps) everywhere else.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import (
    NewtonDivergence,
    NotEscaping,
    RootFindingFailure,
    TooDeep,
)
from .rootfind import aberth, dedup

TWO_PI = 2.0 * math.pi
DEFAULT_BUDGET = 10_000


@dataclass(frozen=True)
class CubicMap:
    """F_{a,v}; a is the marked critical point and v = F(a)."""

    a: complex
    v: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "v", complex(self.v))

    @classmethod
    def from_centered(cls, c1: complex, c0: complex) -> "CubicMap":
        """The map z^3 + c1 z + c0, with a = sqrt(-c1/3) on the principal branch."""
        a = cmath.sqrt(-complex(c1) / 3.0)
        return cls(a, a**3 + c1 * a + c0)

    @property
    def c1(self) -> complex:
        return -3.0 * self.a * self.a

    @property
    def c0(self) -> complex:
        return 2.0 * self.a**3 + self.v

    @property
    def critical_points(self) -> tuple[complex, complex]:
        return self.a, -self.a

    def __call__(self, z):
        return z * z * z + self.c1 * z + self.c0

    def derivative(self, z):
        return 3.0 * z * z + self.c1

    def iterate(self, z, n: int):
        c1, c0 = self.c1, self.c0
        for _ in range(n):
            z = z * z * z + c1 * z + c0
        return z

    def iterate_with_derivative(self, z, n: int):
        """(F^n(z), (F^n)'(z))."""
        c1, c0 = self.c1, self.c0
        d = 1.0 + 0j
        for _ in range(n):
            d = d * (3.0 * z * z + c1)
            z = z * z * z + c1 * z + c0
        return z, d

    def iterate_with_derivatives(self, z, n: int):
        """(F^n(z), (F^n)'(z), (F^n)''(z))."""
        c1, c0 = self.c1, self.c0
        d, dd = 1.0 + 0j, 0j
        for _ in range(n):
            fp = 3.0 * z * z + c1
            dd = 6.0 * z * d * d + fp * dd
            d = d * fp
            z = z * z * z + c1 * z + c0
        return z, d, dd

    @property
    def escape_radius(self) -> float:
        """Beyond this radius |F(z)| >= 2|z|, so orbits escape."""
        return 2.0 * (1.0 + abs(self.a) + abs(self.c0) ** (1.0 / 3.0))

    @property
    def direct_radius(self) -> float:
        """Beyond this radius the Böttcher product formula is used as is."""
        return 8.0 * max(1.0, math.sqrt(abs(self.c1)), abs(self.c0) ** (1.0 / 3.0),
                         self.escape_radius / 2.0)

    def to_json(self) -> dict:
        return {"a": [self.a.real, self.a.imag], "v": [self.v.real, self.v.imag]}


def eval_map(F: CubicMap, z):
    return F(z)


def orbit(F: CubicMap, z: complex, n: int) -> list[complex]:
    out = [complex(z)]
    for _ in range(n):
        out.append(F(out[-1]))
    return out


# --- Böttcher coordinate --------------------------------------------------

def _log_bottcher_direct(F: CubicMap, z: complex) -> complex:
    """log B(z) from the product formula; needs |z| >= F.direct_radius."""
    c1, c0 = F.c1, F.c0
    acc = cmath.log(z)
    weight = 1.0 / 3.0
    w = z
    while weight > 1e-18:
        ratio = (c1 * w + c0) / (w * w * w)
        if abs(ratio) < 1e-17:
            break
        acc += weight * cmath.log(1.0 + ratio)
        w = w * w * w * (1.0 + ratio)
        weight /= 3.0
    return acc


def _escape_depth(F: CubicMap, z: complex, budget: int) -> Optional[tuple[int, complex]]:
    """First n with |F^n(z)| >= direct radius, with that point; None if bounded."""
    R = F.direct_radius
    w = complex(z)
    for n in range(budget + 1):
        if abs(w) >= R:
            return n, w
        w = F(w)
        if not cmath.isfinite(w):
            return None
    return None


def green(F: CubicMap, z: complex, budget: int = DEFAULT_BUDGET) -> float:
    """Green's function log+ growth rate; 0 on the filled Julia set."""
    hit = _escape_depth(F, z, budget)
    if hit is None:
        return 0.0
    n, w = hit
    return _log_bottcher_direct(F, w).real / 3.0**n


def green_array(F: CubicMap, Z: np.ndarray, budget: int = 500) -> np.ndarray:
    """Vectorized Green's function for rendering (0 where undecided)."""
    Z = np.asarray(Z, dtype=complex)
    out = np.zeros(Z.shape)
    w = Z.copy()
    alive = np.ones(Z.shape, dtype=bool)
    R = F.direct_radius
    c1, c0 = F.c1, F.c0
    for n in range(budget + 1):
        hit = alive & (np.abs(w) >= R)
        if hit.any():
            wh = w[hit]
            acc = np.log(wh)
            weight = 1.0 / 3.0
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                for _ in range(40):
                    ratio = (c1 * wh + c0) / wh**3
                    ratio = np.where(np.isfinite(ratio), ratio, 0.0)
                    acc = acc + weight * np.log1p(ratio)
                    if np.abs(ratio).max() < 1e-17:
                        break
                    wh = wh**3 * (1.0 + ratio)
                    weight /= 3.0
            out[hit] = acc.real / 3.0**n
            alive &= ~hit
        if not alive.any():
            break
        w = np.where(alive, w * w * w + c1 * w + c0, 0)
    return out


def inverse_bottcher(F: CubicMap, W: complex, seed: Optional[complex] = None) -> complex:
    """The point u with B(u) = W; needs |W| comfortably beyond the direct radius."""
    target = cmath.log(W)
    u = complex(W) if seed is None else complex(seed)
    for _ in range(60):
        diff = _log_bottcher_direct(F, u) - target
        diff = complex(diff.real, (diff.imag + math.pi) % TWO_PI - math.pi)
        # d log B / du is 1/u up to O(u^-3).
        u_new = u - diff * u
        if abs(u_new - u) <= 1e-15 * abs(u):
            return u_new
        u = u_new
    return u


def big_potential(F: CubicMap) -> float:
    """Potential above which a point is in the direct region."""
    return math.log(2.0 * F.direct_radius)


def pullback_newton(F: CubicMap, k: int, u: complex, seed: complex, *,
                    tol: float = 1e-13, maxit: int = 80) -> tuple[complex, complex]:
    """Solve F^k(z) = u near seed; returns (z, (F^k)'(z))."""
    # Evaluating F^k loses about 3^k ulps, so the attainable residual grows with k.
    tol = max(tol, 64.0 * 3.0**k * 2.2e-16)
    z = complex(seed)
    prev = math.inf
    for _ in range(maxit):
        w, d = F.iterate_with_derivative(z, k)
        res = w - u
        err = abs(res)
        # Rounding z itself perturbs F^k(z) by about |(F^k)'| ulp(z).
        if err <= max(tol * abs(u), 32.0 * abs(d) * 2.2e-16 * max(1.0, abs(z))):
            return z, d
        if d == 0 or not cmath.isfinite(w):
            raise NewtonDivergence("vanishing derivative in pullback")
        step = res / d
        # Damp when the residual grows.
        if err > prev:
            step *= 0.5
        prev = err
        z -= step
        if abs(step) <= 1e-12 * max(1.0, abs(z)):
            return z, F.iterate_with_derivative(z, k)[1]
    raise NewtonDivergence(f"pullback Newton did not converge at depth {k}")


def depth_for(F: CubicMap, G: float) -> int:
    """Smallest k with 3^k G above the big potential."""
    Gb = big_potential(F)
    if G <= 0:
        raise ValueError("potential must be positive")
    return max(0, math.ceil(math.log(Gb / G, 3) - 1e-12))


AngleAtDepth = Callable[[int, complex], float]


def march(F: CubicMap, z: complex, G: float, G_end: float, angle_at_depth: AngleAtDepth,
          *, max_log_step: float = math.log(3.0) / 8.0, min_log_step: float = 1e-9,
          on_sample: Optional[Callable[[float, complex], None]] = None,
          stop: Optional[Callable[[float, complex], bool]] = None) -> tuple[float, complex]:
    """Follow a gradient line of the Green's function from potential G to G_end.

    Each step solves F^k(z) = B^{-1}(exp(3^k G' + i·angle_at_depth(k, z))) by
    Newton from a first-order predictor, where k is the depth that puts the
    image in the direct region.  Steps shrink when the Newton correction is
    not small next to the predictor step, which keeps the branch continuous.
    """
    cur, Gc = complex(z), float(G)
    sign = 1.0 if G_end > G else -1.0
    h = max_log_step
    while (G_end - Gc) * sign > 1e-15 * G_end:
        Gn = Gc * math.exp(sign * h)
        if (Gn - G_end) * sign > 0:
            Gn = G_end
        k = depth_for(F, min(Gc, Gn))
        wk, d, dd = F.iterate_with_derivatives(cur, k)
        if abs(d) < 1e-300:
            raise TooDeep("gradient line runs into a critical point")
        theta_k = angle_at_depth(k, cur)
        u = inverse_bottcher(F, cmath.exp(complex(3.0**k * Gn, theta_k)))
        seed = cur + (3.0**k * (Gn - Gc)) * wk / d
        # |d / dd| estimates the distance to the nearest critical point of F^k.
        ok = False
        if dd != 0 and abs(seed - cur) > 0.25 * abs(d / dd):
            h *= 0.5
            if h < min_log_step:
                raise TooDeep(f"gradient line continuation stalled at potential {Gc:.6g}")
            continue
        try:
            nxt, _ = pullback_newton(F, k, u, seed)
            ok = abs(nxt - seed) <= 0.25 * abs(seed - cur) + 1e-13 * max(1.0, abs(cur))
        except NewtonDivergence:
            pass
        if not ok:
            h *= 0.5
            if h < min_log_step:
                raise TooDeep(f"gradient line continuation stalled at potential {Gc:.6g}")
            continue
        cur, Gc = nxt, Gn
        if on_sample is not None:
            on_sample(Gc, cur)
        if stop is not None and stop(Gc, cur):
            break
        h = min(max_log_step, h * 1.5)
    return Gc, cur


def _outward_angle(F: CubicMap, z: complex, G: float) -> float:
    """arg B(z) / 2π by climbing the gradient line through z."""
    Gb = big_potential(F)
    if G >= Gb:
        return (_log_bottcher_direct(F, z).imag / TWO_PI) % 1.0

    def same_line(k: int, cur: complex) -> float:
        return _log_bottcher_direct(F, F.iterate(cur, k)).imag

    _, top = march(F, z, G, Gb, same_line)
    return (_log_bottcher_direct(F, top).imag / TWO_PI) % 1.0


def log_bottcher(F: CubicMap, z: complex, budget: int = DEFAULT_BUDGET) -> complex:
    """log B(z) = γ(z) + 2πi·arg."""
    hit = _escape_depth(F, z, budget)
    if hit is None:
        raise NotEscaping("point does not escape; Böttcher coordinate undefined")
    n, w = hit
    Lw = _log_bottcher_direct(F, w)
    G = Lw.real / 3.0**n
    if n == 0:
        return Lw
    theta = _outward_angle(F, z, G)
    # Snap to the exact 3^n-th root of B(F^n(z)) nearest the traced angle.
    base = Lw.imag / (TWO_PI * 3.0**n)
    step = 1.0 / 3.0**n
    j = round((theta - base) / step)
    return complex(G, TWO_PI * ((base + j * step) % 1.0))


def bottcher(F: CubicMap, z: complex, budget: int = DEFAULT_BUDGET) -> complex:
    return cmath.exp(log_bottcher(F, z, budget))


def external_angle(F: CubicMap, z: complex, budget: int = DEFAULT_BUDGET) -> float:
    return (log_bottcher(F, z, budget).imag / TWO_PI) % 1.0


def parameter_green(F: CubicMap, budget: int = DEFAULT_BUDGET) -> float:
    G = green(F, 2.0 * F.a, budget)
    if G <= 0.0:
        raise NotEscaping("the free critical orbit does not escape")
    return G


def cocritical_angle(F: CubicMap, budget: int = DEFAULT_BUDGET) -> float:
    """arg B(2a) / 2π in [0, 1)."""
    parameter_green(F, budget)
    return external_angle(F, 2.0 * F.a, budget)


# --- periodic points ------------------------------------------------------

class PointKind(str, Enum):
    ATTRACTING = "Attracting"
    REPELLING = "Repelling"
    PARABOLIC_LIKE = "ParabolicLike"
    INDIFFERENT = "Indifferent"


@dataclass(frozen=True)
class PeriodicPoint:
    z: complex
    period: int
    multiplier: complex
    kind: PointKind
    tol: float = 1e-6

    def to_json(self) -> dict:
        return {
            "z": [self.z.real, self.z.imag],
            "period": self.period,
            "multiplier": [self.multiplier.real, self.multiplier.imag],
            "kind": self.kind.value,
            "tol": self.tol,
        }


def classify_multiplier(lam: complex, tol: float = 1e-6, max_root: int = 24) -> PointKind:
    r = abs(lam)
    if r < 1.0 - tol:
        return PointKind.ATTRACTING
    if r > 1.0 + tol:
        return PointKind.REPELLING
    for m in range(1, max_root + 1):
        if abs(lam**m - 1.0) <= m * tol:
            return PointKind.PARABOLIC_LIKE
    return PointKind.INDIFFERENT


def _iterate_ratio(F: CubicMap, n: int):
    """Newton ratio of F^n(z) - z, safe for escaping start points."""
    c1, c0 = F.c1, F.c0

    def ratio(z0: np.ndarray) -> np.ndarray:
        z = z0.copy()
        d = np.ones_like(z)
        out = np.empty_like(z)
        live = np.ones(z.shape, dtype=bool)
        for j in range(n):
            big = live & (np.abs(z) > 1e30)
            if big.any():
                # Far out the remaining steps just cube: the ratio shrinks by 3 each time.
                out[big] = (z[big] / d[big]) / 3.0 ** (n - j)
                live &= ~big
            d = np.where(live, d * (3.0 * z * z + c1), d)
            z = np.where(live, z * z * z + c1 * z + c0, z)
        with np.errstate(all="ignore"):
            out[live] = (z[live] - z0[live]) / (d[live] - 1.0)
        return out

    return ratio


def newton_periodic(F: CubicMap, z: complex, n: int, tol: float = 1e-14,
                    maxit: int = 50) -> complex:
    z = complex(z)
    for _ in range(maxit):
        w, d = F.iterate_with_derivative(z, n)
        if d == 1.0:
            break
        step = (w - z) / (d - 1.0)
        z -= step
        if abs(step) <= tol * max(1.0, abs(z)):
            break
    return z


def fixed_points_of_iterate(F: CubicMap, n: int) -> np.ndarray:
    """All 3^n roots of F^n(z) = z, with multiplicity."""
    N = 3**n
    roots = aberth(_iterate_ratio(F, n), N, 0.9 * F.escape_radius, tol=1e-14)
    if not np.all(np.isfinite(roots)):
        raise RootFindingFailure("non-finite roots of the iterate")
    return roots


def exact_period(F: CubicMap, z: complex, n: int, tol: float = 1e-8) -> int:
    for m in range(1, n + 1):
        if n % m == 0 and abs(F.iterate(z, m) - z) <= tol * max(1.0, abs(z)):
            return m
    return n


def periodic_points(F: CubicMap, n: int, *, dedup_radius: float = 1e-8,
                    kind_tol: float = 1e-6) -> list[PeriodicPoint]:
    """Points of exact period n, deduplicated."""
    raw = fixed_points_of_iterate(F, n)
    polished = [newton_periodic(F, z, n) for z in raw]
    out = []
    for z in dedup(polished, dedup_radius):
        if exact_period(F, z, n, tol=max(1e-8, 10 * dedup_radius)) != n:
            continue
        lam = F.iterate_with_derivative(z, n)[1]
        out.append(PeriodicPoint(z, n, lam, classify_multiplier(lam, kind_tol), kind_tol))
    return out


# --- fate of the free critical point ---------------------------------------

@dataclass(frozen=True)
class Escape:
    G: float


@dataclass(frozen=True)
class Cycle:
    points: tuple[PeriodicPoint, ...]

    @property
    def period(self) -> int:
        return self.points[0].period

    @property
    def multiplier(self) -> complex:
        return self.points[0].multiplier


@dataclass(frozen=True)
class Undecided:
    iterations: int


OrbitLimit = Union[Escape, Cycle, Undecided]


def free_orbit_limit(F: CubicMap, budget: int = DEFAULT_BUDGET, max_period: int = 64,
                     start: Optional[complex] = None) -> OrbitLimit:
    """Escape, attracting cycle, or undecided for the orbit of -a (or of start)."""
    z = -F.a if start is None else complex(start)
    R = F.escape_radius
    history = []
    for i in range(budget):
        if abs(z) > R:
            return Escape(green(F, -F.a if start is None else start, budget))
        history.append(z)
        z = F(z)
        if i >= 64 and i % 64 == 0:
            found = _detect_cycle(F, history[-(2 * max_period + 1):], max_period)
            if found is not None:
                return found
    found = _detect_cycle(F, history[-(2 * max_period + 1):], max_period)
    return found if found is not None else Undecided(budget)


def _detect_cycle(F: CubicMap, tail: Sequence[complex], max_period: int) -> Optional[Cycle]:
    last = tail[-1]
    scale = max(1.0, abs(last))
    for m in range(1, min(max_period, len(tail) - 1) + 1):
        if abs(tail[-1 - m] - last) > 1e-6 * scale:
            continue
        z = newton_periodic(F, last, m)
        if abs(F.iterate(z, m) - z) > 1e-10 * max(1.0, abs(z)):
            continue
        lam = F.iterate_with_derivative(z, m)[1]
        if abs(lam) >= 1.0:
            return None
        pts, w = [], z
        for _ in range(m):
            pts.append(PeriodicPoint(w, m, lam, classify_multiplier(lam)))
            w = F(w)
        return Cycle(tuple(pts))
    return None


def orbit_meets(F: CubicMap, cycle: Cycle, start: complex, tol: float = 1e-6) -> bool:
    """True when start is a point of the given cycle (up to tol)."""
    return any(abs(p.z - start) <= tol * max(1.0, abs(start)) for p in cycle.points)


def angle_to_float(theta: Union[Fraction, float]) -> float:
    return float(theta) % 1.0
