"""Dynamic rays: tracing, crashes, landing points, portraits and kneading.

A ray point at potential G is the solution of F^k(z) = B^{-1}(exp(3^k(G + 2πiθ)))
near the previous sample, with k chosen so the right-hand side lies where the
Böttcher coordinate is given by its product formula.  The argument 3^kθ is
reduced mod 1 exactly when θ is rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .dynamics import (
    TWO_PI,
    CubicMap,
    big_potential,
    green,
    green_array,
    inverse_bottcher,
    march,
    newton_periodic,
    parameter_green,
    cocritical_angle,
)
from .errors import (
    ClusterAmbiguous,
    NewtonDivergence,
    NotEscaping,
    RayCrashed,
    TooDeep,
    TraceFailure,
    WallTraceFailed,
)
from .exact_angles import Angle, AngleLike, as_angle, period_under_tripling, periodic_angles
from .portraits import OrbitPortrait

RayAngle = Union[Angle, float]
DEFAULT_G_MIN = 1e-8
# Below this potential a stalled trace is handed to the landing pullback.
LOST_G = 1e-3


@dataclass(frozen=True)
class Landed:
    z: complex
    residual: float


@dataclass(frozen=True)
class Crashed:
    z: complex
    potential: float


@dataclass(frozen=True)
class Truncated:
    G_min: float
    z: complex


RayStatus = Union[Landed, Crashed, Truncated]


@dataclass
class DynamicRay:
    angle: RayAngle
    samples: list[tuple[float, complex]] = field(default_factory=list)
    status: Optional[RayStatus] = None

    @property
    def endpoint(self) -> complex:
        if isinstance(self.status, (Landed, Crashed)):
            return self.status.z
        return self.samples[-1][1]

    def to_json(self) -> dict:
        status = self.status
        if isinstance(status, Landed):
            st = {"kind": "Landed", "z": [status.z.real, status.z.imag]}
        elif isinstance(status, Crashed):
            st = {"kind": "Crashed", "z": [status.z.real, status.z.imag],
                  "potential": status.potential}
        elif isinstance(status, Truncated):
            st = {"kind": "Truncated", "G_min": status.G_min}
        else:
            st = None
        return {
            "angle": str(self.angle) if isinstance(self.angle, Angle) else self.angle,
            "samples": [{"G": g, "z": [z.real, z.imag]} for g, z in self.samples],
            "status": st,
        }


def _angle_at_depth(theta: RayAngle) -> Callable[[int, complex], float]:
    if isinstance(theta, Angle):
        frac = theta.fraction

        def exact(k: int, _z: complex) -> float:
            return TWO_PI * float((frac * 3**k) % 1)

        return exact

    def approx(k: int, _z: complex) -> float:
        return TWO_PI * ((float(theta) * 3**k) % 1.0)

    return approx


def ray_point(F: CubicMap, theta: RayAngle, G: float) -> complex:
    """The point of potential G on the ray, for G at or above the big potential."""
    arg = _angle_at_depth(theta)(0, 0j)
    return inverse_bottcher(F, math.e ** G * complex(math.cos(arg), math.sin(arg)))


def _critical_levels(F: CubicMap, G_min: float) -> list[tuple[float, complex, int]]:
    """(potential, critical point, j) for escaping critical points and their j-th preimage levels."""
    levels = []
    for c in F.critical_points:
        g = green(F, c)
        if g <= 0.0:
            continue
        j = 0
        while g / 3**j > G_min:
            levels.append((g / 3**j, c, j))
            j += 1
    levels.sort(key=lambda t: -t[0])
    return levels


def trace_dynamic_ray(F: CubicMap, theta: Union[AngleLike, float], G_max: Optional[float] = None,
                      G_min: float = DEFAULT_G_MIN, step_factor: float = 3.0 ** 0.125, *,
                      crash_tol: float = 1e-3, land: bool = True,
                      pullbacks: int = 400) -> DynamicRay:
    """Trace the ray of angle theta from potential G_max down to G_min.

    A ray that meets a critical or precritical point (to within crash_tol)
    stops there as Crashed.  For rational theta the endpoint is refined to
    the landing point when that point is repelling.
    """
    if not isinstance(theta, float):
        theta = as_angle(theta)
    Gb = big_potential(F)
    G_top = max(Gb, G_max or 0.0)
    z = ray_point(F, theta, G_top)
    ray = DynamicRay(theta, [(G_top, z)])
    angle_fn = _angle_at_depth(theta)
    max_log = math.log(step_factor)

    def record(g: float, w: complex) -> None:
        ray.samples.append((g, w))

    G = G_top
    for level, c, j in _critical_levels(F, G_min) + [(G_min, None, 0)]:
        if level >= G:
            continue
        try:
            G, z = march(F, z, G, level, angle_fn, max_log_step=max_log, on_sample=record)
        except TooDeep:
            G, z = ray.samples[-1]
            near = _nearest_critical(F, z, G)
            if near is not None and near[0] <= math.sqrt(crash_tol):
                ray.status = Crashed(z, level)
                return ray
            if G > LOST_G:
                raise NewtonDivergence(f"ray {theta} lost at potential {G:.6g}")
            # Past the precision floor of a disconnected Julia set; the
            # landing pullback below takes over from here.
            break
        if c is not None and abs(F.iterate(z, j) - c) <= crash_tol * max(1.0, abs(c)):
            ray.status = Crashed(z, level)
            return ray
    ray.status = Truncated(G, z)
    if land and isinstance(theta, Angle):
        landed = land_rational(F, theta, z, pullbacks=pullbacks)
        if landed is not None:
            ray.status = landed
    return ray


def _nearest_critical(F: CubicMap, z: complex, G: float) -> Optional[tuple[float, complex]]:
    best = None
    for c in F.critical_points:
        g = green(F, c)
        if g <= 0:
            continue
        j = round(math.log(g / G, 3)) if G > 0 else 0
        if j < 0:
            continue
        dist = abs(F.iterate(z, j) - c)
        if best is None or dist < best[0]:
            best = (dist, c)
    return best


def _inverse_step(F: CubicMap, z: complex, q: int) -> complex:
    """The preimage of z under F^q nearest z (Newton seeded at z)."""
    w = complex(z)
    for _ in range(60):
        fz, d = F.iterate_with_derivative(w, q)
        if d == 0:
            raise NewtonDivergence("critical point in landing pullback")
        step = (fz - z) / d
        w -= step
        if abs(step) <= 1e-15 * max(1.0, abs(w)):
            break
    return w


def land_periodic(F: CubicMap, z_end: complex, q: int, pullbacks: int = 400,
                  tol: float = 1e-12) -> Optional[Landed]:
    """Landing point of a period-q ray from its endpoint, if repelling.

    Pulling the endpoint back along the ray by the branch of F^{-q} fixing
    the landing point converges geometrically when that point repels.
    """
    z = complex(z_end)
    for _ in range(pullbacks):
        try:
            w = _inverse_step(F, z, q)
        except NewtonDivergence:
            return None
        moved = abs(w - z)
        z = w
        if moved <= 1e-10 * max(1.0, abs(z)):
            break
    else:
        return None
    z = newton_periodic(F, z, q)
    fz, lam = F.iterate_with_derivative(z, q)
    res = abs(fz - z)
    if res > 1e-10 * max(1.0, abs(z)) or abs(lam) <= 1.0 + 1e-9:
        return None
    return Landed(z, res)


def land_rational(F: CubicMap, theta: Angle, z_end: complex,
                  pullbacks: int = 400) -> Optional[Landed]:
    per = period_under_tripling(theta)
    if per is not None:
        return land_periodic(F, z_end, per, pullbacks)
    # Preperiodic: land the periodic image ray, then pull back along F^l.
    l, image = 0, theta
    while period_under_tripling(image) is None:
        image = image * 3
        l += 1
        if l > 64:
            return None
    target = land_periodic(F, F.iterate(z_end, l), period_under_tripling(image), pullbacks)
    if target is None:
        return None
    z = complex(z_end)
    for _ in range(60):
        fz, d = F.iterate_with_derivative(z, l)
        if d == 0:
            return None
        step = (fz - target.z) / d
        z -= step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    res = abs(F.iterate(z, l) - target.z)
    if res > 1e-9 * max(1.0, abs(z)):
        return None
    return Landed(z, res)


def orbit_portrait_numeric(F: CubicMap, q: int, tol: float = 1e-6,
                           G_min: float = DEFAULT_G_MIN) -> OrbitPortrait:
    """Partition the period-q angles by the landing points of their rays."""
    angles = periodic_angles(q)
    points = []
    for theta in angles:
        ray = trace_dynamic_ray(F, theta, G_min=G_min)
        if isinstance(ray.status, Crashed):
            raise RayCrashed(f"ray {theta} crashes; the map lies on a parameter edge")
        if not isinstance(ray.status, Landed):
            raise TraceFailure(f"ray {theta} did not reach a repelling landing point")
        points.append(ray.status.z)
    classes: list[list[int]] = []
    for i, z in enumerate(points):
        scale = max(1.0, abs(z))
        joined = None
        for cls in classes:
            dist = min(abs(points[m] - z) for m in cls) / scale
            if dist < tol:
                if joined is None:
                    cls.append(i)
                    joined = cls
                else:
                    joined.extend(cls)
                    cls.clear()
            elif dist < 3 * tol:
                raise ClusterAmbiguous(f"landing points {dist:.3g} apart near the cluster radius")
        classes = [c for c in classes if c]
        if joined is None:
            classes.append([i])
    groups = [[angles[i] for i in cls] for cls in classes if len(cls) > 1]
    return OrbitPortrait.from_angles(q, groups)


# --- walls and kneading ------------------------------------------------------

@dataclass(frozen=True)
class Wall:
    rays: tuple[DynamicRay, DynamicRay]
    polyline: tuple[complex, ...]
    polygon: tuple[complex, ...]

    def side(self, z: complex) -> bool:
        """True when z lies inside the closed wall polygon."""
        return _point_in_polygon(z, self.polygon)


@dataclass(frozen=True)
class KneadingInvariant:
    bits: tuple[int, ...]

    def __post_init__(self):
        if not self.bits or self.bits[-1] != 0:
            raise ValueError("the last kneading bit is always 0")

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


def _point_in_polygon(z: complex, poly: Sequence[complex]) -> bool:
    """Even-odd rule crossing test."""
    x, y = z.real, z.imag
    inside = False
    n = len(poly)
    for i in range(n):
        p, r = poly[i], poly[(i + 1) % n]
        if (p.imag > y) != (r.imag > y):
            xc = p.real + (y - p.imag) * (r.real - p.real) / (r.imag - p.imag)
            if xc > x:
                inside = not inside
    return inside


def build_wall(F: CubicMap, theta: Union[float, Angle], delta: float = 1e-3) -> Wall:
    """The two rays theta +- 1/3 down to just above the critical level, joined at -a."""
    Gc = parameter_green(F)
    rays = []
    for shift in (Fraction(1, 3), Fraction(-1, 3)):
        ang = (theta + shift) if isinstance(theta, Angle) else (float(theta) + float(shift)) % 1.0
        try:
            ray = trace_dynamic_ray(F, ang, G_min=Gc * (1.0 + delta), land=False)
        except (NewtonDivergence, TooDeep) as exc:
            raise WallTraceFailed(str(exc)) from exc
        if isinstance(ray.status, Crashed):
            raise WallTraceFailed(f"wall ray {ang} crashed above the critical level")
        rays.append(ray)
    r1 = [z for _, z in rays[0].samples]
    r2 = [z for _, z in rays[1].samples]
    polyline = tuple(r1 + [-F.a] + r2[::-1])
    R = 4.0 * max(abs(w) for w in polyline)
    a1, a2 = math.atan2(r1[0].imag, r1[0].real), math.atan2(r2[0].imag, r2[0].real)
    # Close with a radial spoke out of each ray start and an arc of the big circle.
    sweep = (a1 - a2) % TWO_PI
    arc = [R * complex(math.cos(a2 + sweep * s / 64), math.sin(a2 + sweep * s / 64))
           for s in range(65)]
    polygon = polyline + tuple(arc)
    return Wall((rays[0], rays[1]), polyline, polygon)


def kneading_by_wall(F: CubicMap, p: int, theta: Optional[float] = None,
                     delta: float = 1e-3) -> KneadingInvariant:
    if theta is None:
        theta = cocritical_angle(F)
    wall = build_wall(F, theta, delta)
    home = wall.side(F.a)
    bits = []
    z = F.a
    for _ in range(p):
        z = F(z)
        bits.append(0 if wall.side(z) == home else 1)
    return KneadingInvariant(tuple(bits))


def kneading_by_flood_fill(F: CubicMap, p: int, res: int = 512,
                           margin: float = 1e-3) -> KneadingInvariant:
    """Components of {γ < γ(-a)} on a grid; bit j compares the components of F^j(a) and a."""
    from scipy import ndimage

    Gc = parameter_green(F)
    orbit = [F.a]
    for _ in range(p):
        orbit.append(F(orbit[-1]))
    # The level curve through -a also passes through 2a, so this window holds both lobes.
    R = 1.25 * max(abs(2.0 * F.a), max(abs(z) for z in orbit)) + 1e-9
    xs = np.linspace(-R, R, res)
    X, Y = np.meshgrid(xs, xs)
    Z = X + 1j * Y
    low = green_array(F, Z) < Gc * (1.0 - margin)
    labels, _ = ndimage.label(low)

    def label_of(z: complex) -> int:
        i = int(round((z.imag + R) / (2 * R) * (res - 1)))
        j = int(round((z.real + R) / (2 * R) * (res - 1)))
        lab = labels[i, j]
        if lab == 0:
            raise WallTraceFailed("marked orbit point fell outside the grid lobes")
        return lab

    home = label_of(orbit[0])
    bits = [0 if label_of(z) == home else 1 for z in orbit[1:]]
    return KneadingInvariant(tuple(bits))


def kneading_invariant(F: CubicMap, theta: Optional[float] = None, p: int = 2, *,
                       cross_check: bool = True, res: int = 512) -> KneadingInvariant:
    """Kneading bits of an escaping map, by the wall, optionally confirmed by flood fill."""
    if green(F, -F.a) <= 0.0:
        raise NotEscaping("kneading needs an escaping free critical point")
    wall = kneading_by_wall(F, p, theta)
    if cross_check:
        flood = kneading_by_flood_fill(F, p, res)
        if flood != wall:
            raise WallTraceFailed(f"wall gives {wall}, flood fill gives {flood}")
    return wall


# --- stability probe ---------------------------------------------------------

@dataclass(frozen=True)
class ProbeReport:
    s_values: tuple[float, ...]
    landings: tuple[complex, ...]
    statuses: tuple[str, ...]
    jumps: tuple[float, ...]
    steps: tuple[float, ...]
    discontinuous: bool

    @property
    def max_jump(self) -> float:
        return max(self.jumps, default=0.0)

    @property
    def verdict(self) -> str:
        return "Discontinuous" if self.discontinuous else "Continuous"

    def to_json(self) -> dict:
        return {
            "s": list(self.s_values),
            "landings": [[z.real, z.imag] for z in self.landings],
            "statuses": list(self.statuses),
            "jumps": list(self.jumps),
            "max_jump": self.max_jump,
            "verdict": self.verdict,
        }


def parabolic_landing(F: CubicMap, theta: Angle, z_end: complex,
                      reach: float = 0.2, tol: float = 1e-3) -> Optional[complex]:
    """A parabolic periodic point near the end of a slowly converging periodic ray."""
    per = period_under_tripling(theta)
    if per is None:
        return None
    z = newton_periodic(F, z_end, per, maxit=200)
    w, lam = F.iterate_with_derivative(z, per)
    # Roots of unity only up to the multiplier tolerance; the double root converges linearly.
    if abs(w - z) > 1e-8 * max(1.0, abs(z)) or abs(z - z_end) > reach:
        return None
    for m in range(1, 13):
        if abs(lam**m - 1.0) <= tol:
            return z
    return None


def counterexample_family(s: complex) -> CubicMap:
    """z^3 + z^2 + (1+s)z + s, conjugated by z = w - 1/3 to centered form."""
    return CubicMap.from_centered(2.0 / 3.0 + s, 2.0 / 27.0 + 2.0 * s / 3.0)


def parabolic_stability_probe(family: Callable[[complex], CubicMap], theta: AngleLike,
                              s_samples: Sequence[complex], *, G_min: float = 1e-10,
                              factor: float = 10.0) -> ProbeReport:
    """Landing point of the theta ray along a one-parameter family.

    Flags Discontinuous when some consecutive jump exceeds factor times the
    parameter step.
    """
    theta = as_angle(theta)
    landings, statuses = [], []
    for s in s_samples:
        F = family(s)
        ray = trace_dynamic_ray(F, theta, G_min=G_min)
        z, status = ray.endpoint, type(ray.status).__name__
        if isinstance(ray.status, Truncated):
            par = parabolic_landing(F, theta, z)
            if par is not None:
                z, status = par, "Parabolic"
        landings.append(z)
        statuses.append(status)
    jumps = [abs(landings[i + 1] - landings[i]) for i in range(len(landings) - 1)]
    steps = [abs(s_samples[i + 1] - s_samples[i]) for i in range(len(landings) - 1)]
    disc = any(j > factor * h for j, h in zip(jumps, steps))
    return ProbeReport(tuple(complex(s).real if complex(s).imag == 0 else s for s in s_samples),
                       tuple(landings), tuple(statuses), tuple(jumps), tuple(steps), disc)
