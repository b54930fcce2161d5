"""End-to-end acceptance checks, one group per numbered criterion.

Each test is named test_criterion_NN_*; conftest.py folds their outcomes
into one PASS/FAIL line per criterion at the end of the run.
"""

import cmath
import math
import random
import time
from contextlib import contextmanager

import numpy as np
import pytest

from cubictess.combinatorics import (
    angle_counts,
    curve_stats,
    degree,
    edge_count,
    parabolic_vertex_count,
    tess_stats,
)
from cubictess.dynamics import CubicMap, bottcher, green
from cubictess.exact_angles import Angle, co_period, coperiodic_angles
from cubictess.parameter import (
    CenterSpec,
    LandingKind,
    classify_landing,
    expected_center_count,
    find_centers,
    landing_family,
    s2_map,
    trace_parameter_ray,
)
from cubictess.portraits import (
    EdgeKind,
    OrbitPortrait,
    amalgamate,
    classify_edge,
    four_ray_faces,
    is_formal,
)
from cubictess.rays import (
    KneadingInvariant,
    counterexample_family,
    kneading_by_flood_fill,
    kneading_by_wall,
    orbit_portrait_numeric,
    parabolic_stability_probe,
)
from cubictess.tessellation import faces_at_vertex, find_wake, vertex_of, wake_contains

from goldens import COPERIODIC_2, TABLE_ANGLES, TABLE_D, TABLE_TESS

R2 = 1 / math.sqrt(2)


@contextmanager
def budget(seconds: float, label: str):
    start = time.perf_counter()
    yield
    took = time.perf_counter() - start
    print(f"{label}: {took:.2f} s (budget {seconds:g} s)")
    assert took < seconds


def P(q, *classes):
    return OrbitPortrait(q, tuple(tuple(c) for c in classes))


# 1 -------------------------------------------------------------------------------

def test_criterion_01_counting_tables():
    with budget(1.0, "counting"):
        assert [degree(p) for p in range(1, 10)] == TABLE_D
        assert [angle_counts(q) for q in range(1, 9)] == TABLE_ANGLES
        for (q, p), row in TABLE_TESS.items():
            s = tess_stats(q, p)
            assert edge_count(q, p) == row[2]
            assert parabolic_vertex_count(q, p) == row[1]
            assert (s.v_ideal, s.v_par, s.e, s.f) == row[:4]
            c = curve_stats(p)
            assert s.chi == c.N_p + (2 - p) * c.d_p == row[4]
            assert (s.h1_kernel_rank, s.h1_image_rank) == row[5:]
            assert s.v_ideal + s.v_par - s.e + s.f == s.chi + s.h1_kernel_rank + s.h1_image_rank


# 2 -------------------------------------------------------------------------------

def test_criterion_02_coperiodic_enumeration():
    with budget(1.0, "co-periodic enumeration"):
        assert [len(coperiodic_angles(q)) for q in range(1, 7)] == [4, 12, 48, 144, 480, 1392]
        assert coperiodic_angles(2) == [Angle(n, 24) for n in COPERIODIC_2]


# 3 -------------------------------------------------------------------------------

def test_criterion_03_formality():
    with budget(10.0, "portrait algebra"):
        assert not is_formal(P(2, (1, 2, 3, 5, 6, 7)))
        assert is_formal(P(2, (1, 2, 3, 6)))
        a, b, c = P(2, (1, 3)), P(2, (2, 6)), P(2, (5, 7))
        assert is_formal(amalgamate(a, b))
        assert is_formal(amalgamate(a, c))
        assert is_formal(amalgamate(b, c))
        assert not is_formal(amalgamate(a, b, c))


def test_criterion_03_four_ray_model():
    m = four_ray_faces("10/24", "11/24", "14/24", "17/24", 2)
    assert m.shift == (1,)
    assert list(m.faces) == [P(2, (1, 2, 3, 6)), P(2, (2, 6)), P(2, (1, 2), (3, 6)), P(2, (1, 3))]
    # face i fills the sector from ray i to ray i+1, so ray i separates faces i-1 and i
    kinds = [classify_edge(m.faces[i - 1], m.faces[i]) for i in range(4)]
    assert kinds == [EdgeKind.PRIMARY, EdgeKind.PRIMARY, EdgeKind.SECONDARY, EdgeKind.SECONDARY]


# 4 -------------------------------------------------------------------------------

CENTER_CASES = [(p, "A") for p in range(1, 5)] + [
    (m + n, f"B:{m},{n}") for m in range(1, 4) for n in range(1, 4) if m + n <= 4]


def test_criterion_04_centers():
    with budget(60.0, "centers"):
        for p, kind in CENTER_CASES:
            centers = find_centers(p, kind)
            assert len(centers) == expected_center_count(p, CenterSpec.parse(kind))
            assert len(centers) == degree(p)
        b = find_centers(2, "B:1,1")
        assert sorted(F.a.real for F in b) == pytest.approx([-R2, R2], abs=1e-12)
        assert len(find_centers(1, "D:2")) == 6 == 3 * degree(2) * degree(1)


# 5 -------------------------------------------------------------------------------

def test_criterion_05_functional_equations():
    rng = np.random.default_rng(2024)
    with budget(10.0, "functional equations"):
        for _ in range(10):
            a, v = rng.uniform(-1.5, 1.5, 2) + 1j * rng.uniform(-1.5, 1.5, 2)
            F = CubicMap(a, v)
            done = 0
            while done < 1000:
                r = F.escape_radius * rng.uniform(1.0, 4.0)
                z = r * cmath.exp(2j * math.pi * rng.uniform())
                g = green(F, z)
                assert abs(green(F, F(z)) - 3 * g) <= 1e-9 * max(1.0, g)
                B = bottcher(F, z)
                assert abs(bottcher(F, F(z)) - B**3) <= 1e-8 * abs(B) ** 3
                done += 1


# 6 -------------------------------------------------------------------------------

LANDING_CASES = [(region, phi) for region in ("outer", "inner")
                 for q in (1, 2) for phi in coperiodic_angles(q)]


def test_criterion_06_parabolic_landings():
    assert len(LANDING_CASES) == 2 * (4 + 12)
    with budget(300.0, "parabolic landings"):
        for region, phi in LANDING_CASES:
            L = classify_landing(trace_parameter_ray(region, phi))
            assert L.kind is LandingKind.PARABOLIC, (region, phi)
            assert L.ray_period == co_period(phi)


def test_criterion_06_misiurewicz_landings():
    ray = trace_parameter_ray("outer", "0/1")
    L = classify_landing(ray)
    assert L.kind is LandingKind.MISIUREWICZ and (L.preperiod, L.period) == (1, 1)
    # F(2a) = 2a with v = 0 gives a^2 = 1/2, which also satisfies the period-2 condition
    F = ray.map_at()
    assert abs(F.a - R2) < 1e-5 and abs(F.v) < 1e-5
    L = classify_landing(trace_parameter_ray("outer", "1/9"))
    assert L.kind is LandingKind.MISIUREWICZ and (L.preperiod, L.period) == (2, 1)


# 7 -------------------------------------------------------------------------------

@pytest.mark.parametrize("q,p", [(1, 1), (2, 1), (1, 2), (2, 2)])
def test_criterion_07_tessellation_counts(tessellation, q, p):
    T = tessellation(q, p)
    row = TABLE_TESS[q, p]
    assert (T.v_ideal, T.v_par, len(T.edges), len(T.faces)) == row[:4]
    assert T.euler_holds()


def test_criterion_07_edge_kinds(tessellation):
    counts = tessellation(2, 2).edge_kind_counts()
    assert (counts["Primary"], counts["Secondary"], counts["Inactive"]) == (16, 8, 0)


def test_criterion_07_wake_nesting(tessellation):
    big = find_wake(tessellation(1, 1).wakes, "s1", "2/3", "5/6")
    small = find_wake(tessellation(2, 1).wakes, "s1", "17/24", "19/24")
    assert wake_contains(big, small)


# 8 -------------------------------------------------------------------------------

def test_criterion_08_face_constancy(tessellation):
    T = tessellation(2, 2)
    for face in T.faces:
        assert len(face.samples) == 2 and face.samples[0] != face.samples[1]
        portraits = [orbit_portrait_numeric(s2_map(t), 2) for t in face.samples]
        assert portraits[0] == portraits[1] == face.portrait


def test_criterion_08_four_ray_vertex(tessellation):
    T = tessellation(2, 2)
    v = vertex_of(T, "outer", "5/12")
    angles = {T.edges[i].phi for i in T.vertices[v].edges}
    assert angles == {Angle(n, 24) for n in (10, 11, 14, 17)}
    found = sorted(str(T.faces[i].portrait) for i in faces_at_vertex(T, v))
    model = four_ray_faces("10/24", "11/24", "14/24", "17/24", 2)
    assert found == sorted(str(f) for f in model.faces)


# 9 -------------------------------------------------------------------------------

def test_criterion_09_kneading_by_region():
    for region, bits in (("outer", (0, 0)), ("inner", (1, 0))):
        for phi in ("1/7", "3/8"):
            F = s2_map(trace_parameter_ray(region, phi, G_min=0.05).endpoint)
            assert kneading_by_wall(F, 2) == KneadingInvariant(bits)


def test_criterion_09_wall_agrees_with_flood_fill():
    rng = random.Random(5)
    seen = set()
    with budget(60.0, "kneading"):
        n = 0
        while n < 20:
            t = cmath.rect(math.exp(rng.uniform(math.log(0.05), math.log(5))),
                           rng.uniform(0, 2 * math.pi))
            F = s2_map(t)
            if green(F, -F.a) < 0.05:
                continue
            wall = kneading_by_wall(F, 2)
            assert wall == kneading_by_flood_fill(F, 2, res=256)
            seen.add(wall.bits)
            n += 1
    assert seen == {(0, 0), (1, 0)}


# 10 ------------------------------------------------------------------------------

def test_criterion_10_counterexample_jumps():
    with budget(60.0, "counterexample probe"):
        s = [0.02 * i for i in range(11)]
        rep = parabolic_stability_probe(counterexample_family, "0/1", s)
    assert rep.jumps[0] >= 0.1
    assert rep.discontinuous


def test_criterion_10_landing_family_is_continuous():
    with budget(60.0, "landing probe"):
        family, L = landing_family("inner", "5/6")
        sigma = [0.02 * i for i in range(11)]
        rep = parabolic_stability_probe(family, "1/2", sigma)
    assert L.ray_period == 1
    assert max(j / h for j, h in zip(rep.jumps, rep.steps)) <= 10.0
    assert not rep.discontinuous
