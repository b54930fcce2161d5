"""Pictures of Julia sets and of the parameter curves S_1 and S_2."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from PIL import Image, ImageDraw

from .dynamics import Cycle, CubicMap, free_orbit_limit
from .errors import ChartUnavailable, DomainError
from .parameter import chart_inverse, misiurewicz_coordinate, misiurewicz_tail, s1_map, s2_map

MAX_RES = 4096
SUPERSAMPLE = 4

BROWN = np.array([150, 90, 40], dtype=float)
BLUE = np.array([50, 90, 200], dtype=float)
NEUTRAL = np.array([128, 128, 128], dtype=float)
INTERIOR_OTHER = np.array([60, 160, 90], dtype=float)

Color = tuple[int, int, int]


@dataclass(frozen=True)
class Julia:
    F: CubicMap


@dataclass(frozen=True)
class Parameter:
    p: int


@dataclass(frozen=True)
class Overlay:
    """A polyline (several points) or a marker (one point) in plane coordinates."""

    points: tuple[complex, ...]
    color: Color = (220, 30, 30)
    width: float = 1.5
    label: str = ""


@dataclass(frozen=True)
class ImageJob:
    target: Union[Julia, Parameter]
    center: complex = 0j
    width: float = 4.0
    resolution: tuple[int, int] = (512, 512)
    frame: complex = 1.0  # unit complex number rotating the window
    overlays: tuple[Overlay, ...] = ()
    angular: bool = False  # shade the exterior by log_3(potential) mod 1
    budget: int = 300

    def __post_init__(self):
        if not self.width > 0:
            raise DomainError("window width must be positive")
        w, h = self.resolution
        if not (1 <= w <= MAX_RES and 1 <= h <= MAX_RES):
            raise DomainError(f"resolution must be between 1 and {MAX_RES}")
        if abs(abs(self.frame) - 1.0) > 1e-9:
            raise DomainError("frame must have modulus one")

    def grid(self) -> np.ndarray:
        """Plane coordinate of each pixel center, row 0 at the top."""
        w, h = self.resolution
        step = self.width / w
        xs = (np.arange(w) - (w - 1) / 2.0) * step
        ys = ((h - 1) / 2.0 - np.arange(h)) * step
        X, Y = np.meshgrid(xs, ys)
        return self.center + self.frame * (X + 1j * Y)

    def to_pixel(self, z: complex) -> tuple[float, float]:
        w, h = self.resolution
        d = (z - self.center) / self.frame * (w / self.width)
        return d.real + w / 2.0, h / 2.0 - d.imag


# --- vectorized orbits --------------------------------------------------------------

def _iterate(z: np.ndarray, c1, c0, budget: int):
    """Orbits of z under z^3 + c1 z + c0; returns (escape step or -1, potential, final z)."""
    z = np.array(z, dtype=complex)
    c1 = np.broadcast_to(np.asarray(c1, dtype=complex), z.shape)
    c0 = np.broadcast_to(np.asarray(c0, dtype=complex), z.shape)
    bail = 1e4 * (1.0 + np.sqrt(np.abs(c1)) + np.cbrt(np.abs(c0)))
    steps = np.full(z.shape, -1, dtype=int)
    pot = np.zeros(z.shape)
    alive = np.ones(z.shape, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(budget):
            out = alive & (np.abs(z) > bail)
            if out.any():
                steps[out] = n
                pot[out] = np.log(np.abs(z[out])) / 3.0**n
                alive &= ~out
            if not alive.any():
                break
            z = np.where(alive, z * z * z + c1 * z + c0, z)
    return steps, pot, z


def _exterior_rgb(pot: np.ndarray, angular: bool) -> np.ndarray:
    with np.errstate(divide="ignore"):
        L = np.log(pot) / math.log(3.0)
    if angular:
        frac = np.mod(L, 1.0)
        r = 200 + 55 * np.cos(2 * math.pi * frac)
        g = 200 + 55 * np.cos(2 * math.pi * (frac - 1 / 3))
        b = 200 + 55 * np.cos(2 * math.pi * (frac - 2 / 3))
        return np.stack([r, g, b], axis=-1) * 0.9
    shade = 0.55 + 0.45 * np.tanh(0.35 * (L + 4.0))
    base = np.array([255.0, 245.0, 225.0])
    return shade[..., None] * base


def _attracting_cycles(F: CubicMap) -> list[tuple[str, Cycle]]:
    out = []
    for name, c in (("marked", F.a), ("free", -F.a)):
        lim = free_orbit_limit(F, start=c)
        if isinstance(lim, Cycle) and not any(
                abs(p.z - lim.points[0].z) < 1e-8 for _, cyc in out for p in cyc.points):
            out.append((name, lim))
    return out


def julia_image(job: ImageJob) -> np.ndarray:
    """RGB array of shape (h, w, 3), dtype uint8."""
    if not isinstance(job.target, Julia):
        raise DomainError("julia_image needs a Julia target")
    F = job.target.F
    Z = job.grid()
    steps, pot, zf = _iterate(Z, F.c1, F.c0, job.budget)
    img = np.empty(Z.shape + (3,))
    img[...] = NEUTRAL
    esc = steps >= 0
    img[esc] = _exterior_rgb(pot[esc], job.angular)
    inside = ~esc
    for name, cyc in _attracting_cycles(F):
        near = np.zeros(Z.shape, dtype=bool)
        for p in cyc.points:
            near |= np.abs(zf - p.z) < 1e-3 * max(1.0, abs(p.z))
        img[inside & near] = BROWN if name == "marked" else BLUE
    return _finish(img, job)


def _chart_arrays(p: int, T: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if p == 1:
        return T, T
    if p == 2:
        with np.errstate(divide="ignore", invalid="ignore"):
            s = 1.0 / (3.0 * T)
            a = -(s * s + 1.0) / (3.0 * s)
        return a, a + s
    raise ChartUnavailable("parameter pictures exist only for p = 1 and p = 2")


def parameter_image(job: ImageJob) -> np.ndarray:
    """Escape regions shaded by potential; brown when the free orbit joins the
    marked cycle, blue when it has its own attracting cycle."""
    if not isinstance(job.target, Parameter):
        raise DomainError("parameter_image needs a Parameter target")
    p = job.target.p
    T = job.grid()
    a, v = _chart_arrays(p, T)
    c1, c0 = -3.0 * a * a, 2.0 * a**3 + v
    finite = np.isfinite(a)
    a = np.where(finite, a, 0.0)
    c1 = np.where(finite, c1, 0.0)
    c0 = np.where(finite, c0, 0.0)
    steps, pot, zf = _iterate(-a, c1, c0, job.budget)
    img = np.empty(T.shape + (3,))
    img[...] = NEUTRAL
    esc = (steps >= 0) & finite
    img[esc] = _exterior_rgb(pot[esc], job.angular)
    bounded = (steps < 0) & finite
    with np.errstate(over="ignore", invalid="ignore"):
        marked = [a]
        for _ in range(p - 1):
            m = marked[-1]
            marked.append(m**3 + c1 * m + c0)
        scale = np.maximum(1.0, np.abs(a))
        on_marked = np.zeros(T.shape, dtype=bool)
        for m in marked:
            on_marked |= np.abs(zf - m) < 1e-3 * scale
        # An attracting cycle of its own: the orbit returns close to itself.
        w = zf.copy()
        periodic = np.zeros(T.shape, dtype=bool)
        for _ in range(64):
            w = w**3 + c1 * w + c0
            periodic |= np.abs(w - zf) < 1e-6 * scale
    img[bounded & on_marked] = BROWN
    img[bounded & ~on_marked & periodic] = BLUE
    return _finish(img, job)


def _finish(img: np.ndarray, job: ImageJob) -> np.ndarray:
    arr = np.clip(np.nan_to_num(img, nan=128.0), 0, 255).astype(np.uint8)
    if job.overlays:
        arr = draw_overlays(arr, job)
    return arr


def draw_overlays(arr: np.ndarray, job: ImageJob) -> np.ndarray:
    """Anti-aliased overlays by drawing at SUPERSAMPLE times the size and reducing."""
    h, w = arr.shape[:2]
    k = SUPERSAMPLE
    layer = Image.new("RGBA", (w * k, h * k), (0, 0, 0, 0))
    draw = ImageDraw.Draw(layer)
    for ov in job.overlays:
        pts = [tuple(k * c for c in job.to_pixel(z)) for z in ov.points]
        width = max(1, int(round(ov.width * k)))
        if len(pts) == 1:
            x, y = pts[0]
            r = 2.5 * width
            draw.ellipse([x - r, y - r, x + r, y + r], fill=ov.color + (255,))
        else:
            draw.line(pts, fill=ov.color + (255,), width=width, joint="curve")
    layer = layer.resize((w, h), Image.LANCZOS)
    base = Image.fromarray(arr, "RGB").convert("RGBA")
    return np.asarray(Image.alpha_composite(base, layer).convert("RGB"))


# --- overlays -------------------------------------------------------------------

def ray_overlay(F: CubicMap, theta, color: Color = (220, 30, 30), G_min: float = 1e-6) -> Overlay:
    from .rays import trace_dynamic_ray

    ray = trace_dynamic_ray(F, theta, G_min=G_min)
    pts = [z for _, z in ray.samples]
    status = ray.status
    if hasattr(status, "z") and status.z != pts[-1]:
        pts.append(status.z)
    return Overlay(tuple(pts), color, label=f"ray {theta}")


def marked_points(F: CubicMap) -> list[Overlay]:
    return [Overlay((F.a,), (0, 0, 0), label="a"), Overlay((-F.a,), (255, 0, 0), label="-a"),
            Overlay((2 * F.a,), (0, 120, 0), label="2a"), Overlay((-2 * F.a,), (120, 0, 120), label="-2a")]


def parameter_ray_overlay(samples: Sequence[complex], color: Color = (20, 20, 20)) -> Overlay:
    return Overlay(tuple(samples), color)


def overlays_svg(job: ImageJob) -> str:
    w, h = job.resolution
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">']
    for ov in job.overlays:
        pts = [job.to_pixel(z) for z in ov.points]
        color = "rgb({},{},{})".format(*ov.color)
        if len(pts) == 1:
            parts.append(f'<circle cx="{pts[0][0]:.2f}" cy="{pts[0][1]:.2f}" r="3" fill="{color}"/>')
        else:
            coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
            parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                         f'stroke-width="{ov.width}"/>')
    parts.append("</svg>")
    return "\n".join(parts)


# --- output ---------------------------------------------------------------------

def write_ppm(arr: np.ndarray, path: Union[str, Path]) -> None:
    h, w = arr.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(arr, dtype=np.uint8).tobytes())


def save_image(arr: np.ndarray, path: Union[str, Path]) -> None:
    """PNG through Pillow; .ppm (or a failing PNG encoder) falls back to raw PPM."""
    path = Path(path)
    if path.suffix.lower() == ".ppm":
        write_ppm(arr, path)
        return
    try:
        Image.fromarray(arr, "RGB").save(path)
    except (OSError, ValueError, KeyError):
        write_ppm(arr, path.with_suffix(".ppm"))


def side_by_side(left: np.ndarray, right: np.ndarray, gap: int = 8) -> np.ndarray:
    h = max(left.shape[0], right.shape[0])
    out = np.full((h, left.shape[1] + gap + right.shape[1], 3), 255, dtype=np.uint8)
    out[:left.shape[0], :left.shape[1]] = left
    out[:right.shape[0], left.shape[1] + gap:] = right
    return out


# --- similarity -----------------------------------------------------------------

@dataclass
class SimilarityPair:
    dynamic: ImageJob
    parameter: ImageJob
    derivative: complex
    tail: tuple[int, int]
    images: Optional[tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False)


def misiurewicz_derivative(F0: CubicMap, p: int, h: float = 1e-6) -> complex:
    """ds/dt at F0 by central differences of the Misiurewicz coordinate."""
    mapper = {1: s1_map, 2: s2_map}.get(p)
    if mapper is None:
        raise ChartUnavailable("no explicit chart for this p")
    t0 = chart_inverse(F0, p)
    tail = misiurewicz_tail(F0)
    plus = misiurewicz_coordinate(F0, mapper(t0 + h), tail)
    minus = misiurewicz_coordinate(F0, mapper(t0 - h), tail)
    return (plus - minus) / (2 * h)


def similarity_pair(F0: CubicMap, p: int, zoom: float = 1.0, width: float = 1.0,
                    resolution: tuple[int, int] = (400, 400), render: bool = True) -> SimilarityPair:
    """Dynamic window at 2a and the parameter window at F0 scaled by ds/dt."""
    if p not in (1, 2):
        raise ChartUnavailable("similarity pictures need the explicit charts of S_1 or S_2")
    if zoom <= 0:
        raise DomainError("zoom must be positive")
    t0 = chart_inverse(F0, p)
    tail = misiurewicz_tail(F0)
    ds = misiurewicz_derivative(F0, p)
    w = width / zoom
    dyn = ImageJob(Julia(F0), 2.0 * F0.a, w, resolution)
    inv = 1.0 / ds
    par = ImageJob(Parameter(p), t0, w * abs(inv), resolution, frame=inv / abs(inv))
    pair = SimilarityPair(dyn, par, ds, tail)
    if render:
        pair.images = (julia_image(dyn), parameter_image(par))
    return pair
