"""Numerical tessellations Tes_q of the compactified curves S_1 and S_2.

Edges are traced parameter rays of co-period q.  The planar subdivision is
built in the t-plane: the ideal point at infinity becomes a large circle
and, for S_2, the ideal point t = 0 becomes a small one.  Each ray is
extended radially to its circle and joined to its polished landing map.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import networkx as nx
import numpy as np
from shapely.geometry import LineString, Point, Polygon
from shapely.ops import polylabel, polygonize, unary_union

from .combinatorics import parabolic_vertex_count, tess_stats
from .errors import (
    ClusterAmbiguous,
    CubicTessError,
    DomainError,
    NumericFailure,
    PortraitMismatch,
    SampleOnEdge,
    TraceFailure,
)
from .exact_angles import Angle, coperiodic_angles
from .parameter import (
    INNER,
    OUTER,
    S1_REGION,
    EscapeRegionRef,
    Landing,
    LandingKind,
    ParameterRay,
    chart,
    classify_landing,
    trace_parameter_ray,
)
from .portraits import EdgeKind, OrbitPortrait, classify_edge
from .rays import orbit_portrait_numeric

DEFAULT_CLUSTER_RADIUS = 1e-3
CIRCLE_POINTS = 1440


@dataclass
class Vertex:
    id: int
    ideal: bool
    t: complex  # cmath.inf for the ideal point at infinity
    region: Optional[str] = None
    edges: list[int] = field(default_factory=list)
    cyclic_order_ok: Optional[bool] = None

    def to_json(self) -> dict:
        out: dict = {"id": self.id, "kind": "ideal" if self.ideal else "parabolic"}
        if self.ideal:
            out["region"] = self.region
            out["t"] = "inf" if cmath.isinf(self.t) else [self.t.real, self.t.imag]
        else:
            out["t"] = [self.t.real, self.t.imag]
            out["cyclic_order_ok"] = self.cyclic_order_ok
        out["edges"] = list(self.edges)
        return out


@dataclass
class Edge:
    id: int
    region: EscapeRegionRef
    phi: Angle
    ray: ParameterRay
    landing: Landing
    ideal_vertex: int = -1
    vertex: int = -1
    faces: tuple[int, int] = (-1, -1)
    kind: Optional[EdgeKind] = None
    line: Optional[LineString] = None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "region": self.region.name,
            "phi": str(self.phi),
            "ideal_vertex": self.ideal_vertex,
            "vertex": self.vertex,
            "faces": list(self.faces),
            "kind": None if self.kind is None else self.kind.value,
            "landing": self.landing.to_json(),
        }


@dataclass
class Face:
    id: int
    polygon: Polygon
    h1_rank: int
    samples: list[complex] = field(default_factory=list)
    portrait: Optional[OrbitPortrait] = None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "h1_rank": self.h1_rank,
            "area": self.polygon.area,
            "samples": [[z.real, z.imag] for z in self.samples],
            "portrait": None if self.portrait is None else str(self.portrait),
        }


@dataclass
class Wake:
    region: str
    angles: tuple[Angle, Angle]
    vertex: int
    polygon: Polygon  # in the chart where the region's ideal point is u = 0
    parent: Optional[int] = None

    def to_json(self) -> dict:
        return {"region": self.region, "angles": [str(a) for a in self.angles],
                "vertex": self.vertex, "parent": self.parent}


@dataclass
class Tessellation:
    q: int
    p: int
    vertices: list[Vertex]
    edges: list[Edge]
    faces: list[Face]
    components: int
    cluster_radius: float
    big_radius: float
    small_radius: Optional[float]
    wakes: list[Wake] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def v_ideal(self) -> int:
        return sum(1 for v in self.vertices if v.ideal)

    @property
    def v_par(self) -> int:
        return sum(1 for v in self.vertices if not v.ideal)

    @property
    def h1_kernel_rank(self) -> int:
        return self.components - 1

    def euler_lhs(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.faces)

    def euler_holds(self) -> bool:
        chi = 2  # both curves compactify to spheres
        return self.euler_lhs() == chi + sum(f.h1_rank for f in self.faces)

    def edge_kind_counts(self) -> dict[str, int]:
        out = {k.value: 0 for k in EdgeKind}
        for e in self.edges:
            if e.kind is not None:
                out[e.kind.value] += 1
        return out

    def face_at(self, t: complex) -> Optional[int]:
        pt = Point(t.real, t.imag)
        for f in self.faces:
            if f.polygon.contains(pt):
                return f.id
        return None

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "p": self.p,
            "counts": {
                "v_ideal": self.v_ideal,
                "v_par": self.v_par,
                "e": len(self.edges),
                "f": len(self.faces),
                "components": self.components,
                "h1_kernel_rank": self.h1_kernel_rank,
                "euler_holds": self.euler_holds(),
                "max_edges_per_vertex": max((len(v.edges) for v in self.vertices if not v.ideal),
                                            default=0),
            },
            "edge_kinds": self.edge_kind_counts(),
            "vertices": [v.to_json() for v in self.vertices],
            "edges": [e.to_json() for e in self.edges],
            "faces": [f.to_json() for f in self.faces],
            "wakes": [w.to_json() for w in self.wakes],
            "notes": list(self.notes),
        }


def regions_of(p: int) -> list[EscapeRegionRef]:
    if p == 1:
        return [S1_REGION]
    if p == 2:
        return [OUTER, INNER]
    raise DomainError("tessellations are built only for p = 1 and p = 2")


# --- tracing ------------------------------------------------------------------------

def _trace_one(job: tuple[EscapeRegionRef, Angle, float]) -> tuple[ParameterRay, Landing]:
    region, phi, G_min = job
    try:
        ray = trace_parameter_ray(region, phi, G_min=G_min)
        landing = classify_landing(ray)
    except NumericFailure as exc:
        raise TraceFailure(f"{region.name} ray {phi}: {exc}") from exc
    if landing.kind is not LandingKind.PARABOLIC:
        raise TraceFailure(f"{region.name} ray {phi} did not land at a parabolic map")
    return ray, landing


def trace_all(q: int, p: int, G_min: float = 1e-5,
              threads: Optional[int] = None) -> list[tuple[ParameterRay, Landing]]:
    jobs = [(r, phi, G_min) for r in regions_of(p) for phi in coperiodic_angles(q)]
    workers = threads or os.cpu_count() or 1
    if workers <= 1:
        return [_trace_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trace_one, jobs))


# --- clustering ---------------------------------------------------------------------

def cluster_points(points: Sequence[complex], radius: float) -> list[int]:
    """Single-linkage cluster labels, with distances relative to max(1, |t|)."""
    graph = nx.Graph()
    graph.add_nodes_from(range(len(points)))
    for i, z in enumerate(points):
        for j in range(i):
            if abs(points[j] - z) <= radius * max(1.0, abs(z)):
                graph.add_edge(i, j)
    labels = [0] * len(points)
    comps = sorted(nx.connected_components(graph), key=min)
    for n, comp in enumerate(comps):
        for i in comp:
            labels[i] = n
    return labels


def cluster_to_count(points: Sequence[complex], expected: int,
                     radius: float = DEFAULT_CLUSTER_RADIUS) -> tuple[list[int], float, list[str]]:
    """Cluster at the default radius; bisect the radius (log scale) if the count is off."""
    notes: list[str] = []
    labels = cluster_points(points, radius)
    if max(labels, default=-1) + 1 == expected:
        return labels, radius, notes
    notes.append(f"radius {radius:g} gives {max(labels) + 1} vertices, expected {expected}")
    lo, hi = math.log(1e-12), math.log(0.5)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        labels = cluster_points(points, math.exp(mid))
        n = max(labels) + 1
        if n == expected:
            notes.append(f"count matched at radius {math.exp(mid):.3g}")
            return labels, math.exp(mid), notes
        if n > expected:
            lo = mid
        else:
            hi = mid
    raise ClusterAmbiguous("; ".join(notes + ["no clustering radius gives the expected count"]))


# --- geometry -----------------------------------------------------------------------

def _xy(z: complex) -> tuple[float, float]:
    return (z.real, z.imag)


def _circle(radius: float) -> LineString:
    ang = np.linspace(0.0, 2.0 * math.pi, CIRCLE_POINTS, endpoint=False)
    pts = list(zip(radius * np.cos(ang), radius * np.sin(ang)))
    return LineString(pts + [pts[0]])


def _edge_points(edge: Edge, vertex_t: complex, big: float, small: Optional[float]) -> list[complex]:
    """Polyline from the ideal point's circle to the parabolic vertex."""
    pts = [t for _, t in edge.ray.samples]
    first = pts[0]
    # Overshoot the circle slightly so the extension crosses its chords.
    radius = 0.99 * small if edge.region == INNER else 1.01 * big
    pts = [radius * first / abs(first)] + pts
    pts.append(vertex_t)
    return pts


def _check_crossings(edges: list[Edge]) -> None:
    for i, e in enumerate(edges):
        for f in edges[:i]:
            inter = e.line.intersection(f.line)
            if inter.is_empty:
                continue
            allowed = Point(e.line.coords[-1]) if e.vertex == f.vertex else None
            if allowed is None or inter.distance(allowed) > 0 or inter.geom_type != "Point":
                raise TraceFailure(f"rays {e.region.name} {e.phi} and {f.region.name} {f.phi} cross")


def _incidence_angle(edge: Edge, vt: complex) -> float:
    # Direction in which the edge leaves its parabolic vertex.
    end = edge.ray.samples[-1][1]
    return cmath.phase(end - vt)


def _cyclic_match(geometric: list[Angle], by_angle: list[Angle]) -> bool:
    n = len(geometric)
    for seq in (by_angle, by_angle[::-1]):
        for r in range(n):
            if all(geometric[i] == seq[(i + r) % n] for i in range(n)):
                return True
    return False


def build(q: int, p: int, *, G_min: float = 1e-5, cluster_radius: float = DEFAULT_CLUSTER_RADIUS,
          threads: Optional[int] = None, traced: Optional[list] = None) -> Tessellation:
    """Trace every co-period-q ray of S_p and assemble the planar subdivision."""
    if p not in (1, 2):
        raise DomainError("tessellations are built only for p = 1 and p = 2")
    if not 1 <= q <= 3:
        raise DomainError("q is limited to 1..3")
    traced = traced if traced is not None else trace_all(q, p, G_min, threads)
    edges = [Edge(i, ray.region, ray.phi, ray, landing) for i, (ray, landing) in enumerate(traced)]

    # Parabolic vertices.
    expected = parabolic_vertex_count(q, p).value
    labels, radius, notes = cluster_to_count([e.landing.t for e in edges], expected, cluster_radius)
    vertices: list[Vertex] = []
    ideal_ids: dict[str, int] = {}
    for region in regions_of(p):
        vid = len(vertices)
        vertices.append(Vertex(vid, True, 0j if region == INNER else complex(math.inf, 0),
                               region.name))
        ideal_ids[region.name] = vid
    base = len(vertices)
    for n in range(expected):
        members = [e for e, lab in zip(edges, labels) if lab == n]
        vt = complex(np.mean([e.landing.t for e in members]))
        vertices.append(Vertex(base + n, False, vt))
    for e, lab in zip(edges, labels):
        e.vertex = base + lab
        e.ideal_vertex = ideal_ids[e.region.name]
        vertices[e.vertex].edges.append(e.id)
        vertices[e.ideal_vertex].edges.append(e.id)

    # Circles standing in for the ideal points.
    outer_starts = [abs(e.ray.samples[0][1]) for e in edges if e.region != INNER]
    finite = [abs(v.t) for v in vertices if not v.ideal]
    big = 1.25 * max(outer_starts + finite)
    small = None
    if p == 2:
        inner_starts = [abs(e.ray.samples[0][1]) for e in edges if e.region == INNER]
        small = 0.8 * min(inner_starts + [0.5 * min(finite)])
    for e in edges:
        e.line = LineString([_xy(z) for z in _edge_points(e, vertices[e.vertex].t, big, small)])
    _check_crossings(edges)

    # Skeleton topology: components of the graph of vertices and edges.
    graph = nx.MultiGraph()
    graph.add_nodes_from(v.id for v in vertices)
    graph.add_edges_from((e.ideal_vertex, e.vertex) for e in edges)
    components = nx.number_connected_components(graph)

    # Faces of the arrangement.
    lines = [e.line for e in edges] + [_circle(big)]
    if small is not None:
        lines.append(_circle(small))
    polys = list(polygonize(unary_union(lines)))
    faces: list[Face] = []
    for poly in polys:
        if small is not None and poly.area <= 1.01 * math.pi * small * small \
                and poly.contains(Point(0.0, 0.0)):
            continue
        faces.append(Face(len(faces), poly, len(poly.interiors)))
    faces.sort(key=lambda f: -f.polygon.area)
    for i, f in enumerate(faces):
        f.id = i

    T = Tessellation(q, p, vertices, edges, faces, components, radius, big, small, notes=notes)
    for v in vertices:
        if v.ideal or len(v.edges) < 3:
            continue
        es = sorted((edges[i] for i in v.edges), key=lambda e: _incidence_angle(e, v.t))
        T.vertices[v.id].cyclic_order_ok = _cyclic_match([e.phi for e in es],
                                                        sorted(e.phi for e in es))
    if sum(f.h1_rank for f in faces) != T.h1_kernel_rank:
        T.notes.append("face holes do not match the number of skeleton components")
    return T


# --- face portraits and edges -------------------------------------------------------

def _all_lines(T: Tessellation):
    return unary_union([e.line for e in T.edges])


def _largest(geom):
    if geom.geom_type == "Polygon":
        return geom
    return max(geom.geoms, key=lambda g: g.area)


def face_samples(T: Tessellation, face: Face, n: int = 2) -> list[complex]:
    """Interior points far from every edge, by poles of inaccessibility."""
    lines = _all_lines(T)
    clearance = 10.0 * T.cluster_radius
    # Stay near the vertices: far out the maps are strongly escaping and
    # dynamic rays are slow to resolve, while the portrait is the same.
    reach = 2.0 * max(abs(v.t) for v in T.vertices if not v.ideal)
    region = face.polygon.intersection(Point(0.0, 0.0).buffer(reach, 256))
    region = region.difference(lines.buffer(clearance / 2))
    out: list[complex] = []
    for _ in range(n):
        if region.is_empty:
            break
        piece = _largest(region)
        pt = polylabel(piece, tolerance=1e-4 * math.sqrt(piece.area))
        z = complex(pt.x, pt.y)
        if lines.distance(pt) < clearance or face.polygon.exterior.distance(pt) < clearance:
            raise SampleOnEdge(f"face {face.id} has no sample point {clearance:g} away from the edges")
        out.append(z)
        region = region.difference(pt.buffer(0.5 * piece.exterior.distance(pt)))
    if len(out) < n:
        raise SampleOnEdge(f"face {face.id} is too thin for {n} samples")
    return out


def face_portraits(T: Tessellation, samples: int = 2) -> Tessellation:
    mapper = chart(T.p)
    for face in T.faces:
        face.samples = face_samples(T, face, samples)
        portraits = [orbit_portrait_numeric(mapper(t), T.q) for t in face.samples]
        if any(P != portraits[0] for P in portraits[1:]):
            raise PortraitMismatch(
                f"face {face.id}: portraits {', '.join(map(str, portraits))} differ")
        face.portrait = portraits[0]
    return T


def _offset_points(line: LineString, delta: float) -> tuple[complex, complex]:
    n = len(line.coords)
    # Midpoint of the traced part, skipping the radial extension and the join.
    i = max(1, min(n - 3, n // 2))
    x0, y0 = line.coords[i]
    x1, y1 = line.coords[i + 1]
    mid = complex((x0 + x1) / 2, (y0 + y1) / 2)
    tangent = complex(x1 - x0, y1 - y0)
    normal = 1j * tangent / abs(tangent)
    return mid + delta * normal, mid - delta * normal


def edge_faces(T: Tessellation) -> Tessellation:
    lines = [e.line for e in T.edges]
    for e in T.edges:
        others = unary_union([l for l in lines if l is not e.line])
        mid = e.line.interpolate(0.5, normalized=True)
        delta = min(1e-3 * max(1.0, math.hypot(mid.x, mid.y)), 0.2 * others.distance(mid))
        left, right = _offset_points(e.line, delta)
        e.faces = (T.face_at(left), T.face_at(right))
        if None in e.faces:
            raise TraceFailure(f"edge {e.phi} has a side outside every face")
    return T


def classify_edges(T: Tessellation) -> list[EdgeKind]:
    if any(f.portrait is None for f in T.faces):
        raise ValueError("attach face portraits first")
    edge_faces(T)
    for e in T.edges:
        f1, f2 = (T.faces[i] for i in e.faces)
        e.kind = classify_edge(f1.portrait, f2.portrait)
    return [e.kind for e in T.edges]


def faces_at_vertex(T: Tessellation, vid: int) -> list[int]:
    if any(e.faces == (-1, -1) for e in T.edges):
        edge_faces(T)
    out = set()
    for i in T.vertices[vid].edges:
        out.update(T.edges[i].faces)
    return sorted(out)


def vertex_of(T: Tessellation, region: str, phi) -> int:
    for e in T.edges:
        if e.region.name == region and str(e.phi) == str(phi):
            return e.vertex
    raise KeyError(f"no {region} edge at angle {phi}")


# --- wakes --------------------------------------------------------------------------

def _to_chart(region: EscapeRegionRef, z: complex) -> complex:
    return z if region == INNER else 1.0 / z


def wake_polygon(e1: Edge, e2: Edge, vertex_t: complex) -> Polygon:
    """The bounded side of the loop formed by two same-region edges.

    The loop passes through the region's ideal point, which sits at u = 0
    in the chart u = t (inner) or u = 1/t (outer, S_1).
    """
    def pts(e: Edge) -> list[complex]:
        return [t for _, t in e.ray.samples] + [vertex_t]

    loop = [0j] + [_to_chart(e1.region, z) for z in pts(e1)] \
        + [_to_chart(e2.region, z) for z in reversed(pts(e2))]
    poly = Polygon([_xy(z) for z in loop])
    if not poly.is_valid:
        poly = poly.buffer(0)
    return poly


def wake_detect(T: Tessellation) -> list[Wake]:
    wakes: list[Wake] = []
    for v in T.vertices:
        if v.ideal:
            continue
        es = [T.edges[i] for i in v.edges]
        for i, e1 in enumerate(es):
            for e2 in es[i + 1:]:
                if e1.region != e2.region:
                    continue
                lo, hi = sorted((e1, e2), key=lambda e: e.phi)
                wakes.append(Wake(lo.region.name, (lo.phi, hi.phi), v.id,
                                  wake_polygon(lo, hi, v.t)))
    for i, w in enumerate(wakes):
        best = None
        for j, o in enumerate(wakes):
            if i == j or o.region != w.region:
                continue
            if wake_contains(o, w):
                if best is None or o.polygon.area < wakes[best].polygon.area:
                    best = j
            elif not wake_contains(w, o) and _overlap(o, w) > 1e-6:
                raise TraceFailure(f"wakes {w.angles} and {o.angles} overlap without nesting")
        w.parent = best
    T.wakes = wakes
    return wakes


def _overlap(w1: Wake, w2: Wake) -> float:
    inter = w1.polygon.intersection(w2.polygon).area
    return inter / max(1e-300, min(w1.polygon.area, w2.polygon.area))


def wake_contains(big: Wake, small: Wake) -> bool:
    """Nesting of two wakes of the same region, possibly from different tessellations."""
    if big.region != small.region:
        return False
    return _overlap(big, small) > 1.0 - 1e-6 and big.polygon.area > small.polygon.area


def find_wake(wakes: Sequence[Wake], region: str, lo, hi) -> Wake:
    for w in wakes:
        if w.region == region and (str(w.angles[0]), str(w.angles[1])) == (str(lo), str(hi)):
            return w
    raise KeyError(f"no {region} wake bounded by {lo} and {hi}")


# --- full pipeline and export -------------------------------------------------------

def build_full(q: int, p: int, **kw) -> Tessellation:
    T = build(q, p, **kw)
    face_portraits(T)
    classify_edges(T)
    wake_detect(T)
    stats = tess_stats(q, p)
    got = (T.v_ideal, T.v_par, len(T.edges), len(T.faces))
    want = (stats.v_ideal, stats.v_par, stats.e, stats.f)
    if got != want:
        T.notes.append(f"counts {got} differ from the formula counts {want}")
    return T


def to_svg(T: Tessellation, window: Optional[float] = None, size: int = 800) -> str:
    """The 1-skeleton in the t-plane as an SVG document."""
    w = window or 1.2 * max(abs(v.t) for v in T.vertices if not v.ideal)
    scale = size / (2 * w)

    def px(x: float, y: float) -> str:
        return f"{(x + w) * scale:.2f},{(w - y) * scale:.2f}"

    colors = {"outer": "#1f4e9c", "inner": "#a0522d", "s1": "#1f4e9c"}
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">', f'<rect width="{size}" height="{size}" fill="white"/>']
    for e in T.edges:
        pts = " ".join(px(x, y) for x, y in e.line.coords if abs(x) <= 4 * w and abs(y) <= 4 * w)
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{colors[e.region.name]}" '
                     f'stroke-width="1.2"><title>{e.region.name} {e.phi}</title></polyline>')
    for v in T.vertices:
        if not v.ideal:
            cx, cy = px(v.t.real, v.t.imag).split(",")
            parts.append(f'<circle cx="{cx}" cy="{cy}" r="3" fill="black"/>')
    parts.append("</svg>")
    return "\n".join(parts)


__all__ = [
    "Edge", "Face", "Tessellation", "Vertex", "Wake", "build", "build_full", "classify_edges",
    "cluster_points", "cluster_to_count", "edge_faces", "face_portraits", "face_samples",
    "faces_at_vertex", "find_wake", "to_svg", "trace_all", "vertex_of", "wake_contains",
    "wake_detect", "wake_polygon", "CubicTessError",
]
