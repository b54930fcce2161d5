import cmath
import math
import random

import pytest
import sympy

from cubictess.dynamics import CubicMap, cocritical_angle, parameter_green
from cubictess.errors import ChartUnavailable, NotACenter, ZeroParameter
from cubictess.parameter import (
    CenterSpec,
    LandingKind,
    chart,
    chart_inverse,
    classify_landing,
    dual_point,
    expected_center_count,
    find_centers,
    landing_family,
    misiurewicz_coordinate,
    period_residual,
    s1_map,
    s2_map,
    trace_parameter_ray,
)

R2 = 1 / math.sqrt(2)


def test_period_two_chart_symbolically():
    # eliminate v from F(F(a)) = a and drop the period-one factor v = a
    a, v, s = sympy.symbols("a v s")
    F = lambda z: z**3 - 3 * a**2 * z + 2 * a**3 + v  # noqa: E731
    quotient = sympy.cancel((F(F(a)) - a) / (v - a))
    on_chart = quotient.subs({a: -(s**2 + 1) / (3 * s), v: -(s**2 + 1) / (3 * s) + s})
    assert sympy.simplify(on_chart) == 0


def test_chart_basics():
    assert s1_map(0) == CubicMap(0, 0)
    with pytest.raises(ZeroParameter):
        s2_map(0)
    with pytest.raises(ChartUnavailable):
        chart(3)
    with pytest.raises(ChartUnavailable):
        find_centers(3, "D:1")


def test_s2_chart_residual_on_random_points():
    rng = random.Random(7)
    for _ in range(100):
        t = cmath.rect(rng.uniform(0.05, 3.0), rng.uniform(0, 2 * math.pi))
        F = s2_map(t)
        assert period_residual(F, 2) < 1e-12 * max(1.0, abs(F.a)) ** 9
        assert abs(F.v - F.a) > 0
        assert chart_inverse(F, 2) == pytest.approx(t, rel=1e-12)


@pytest.mark.parametrize("p,kind", [(1, "A"), (2, "A"), (3, "A"), (4, "A"), (2, "B:1,1"),
                                    (3, "B:1,2"), (3, "B:2,1"), (1, "D:1"), (1, "D:2"),
                                    (2, "D:1"), (2, "D:2"), (2, "D:3")])
def test_center_counts(p, kind):
    centers = find_centers(p, kind)
    assert len(centers) == expected_center_count(p, CenterSpec.parse(kind))
    assert all(period_residual(F, p) < 1e-8 for F in centers)
    keys = [(round(F.a.real, 9), round(F.a.imag, 9)) for F in centers]
    assert keys == sorted(keys)


def test_named_centers():
    assert find_centers(1, "A") == [CubicMap(0, 0)]
    b = find_centers(2, "B:1,1")
    # v = -a and 4a^3 + v = a give a^2 = 1/2
    assert [F.a for F in b] == pytest.approx([-R2, R2], abs=1e-12)
    assert [F.v for F in b] == pytest.approx([R2, -R2], abs=1e-12)
    assert len(find_centers(1, "D:2")) == 6


def test_duality():
    F = CubicMap(R2, -R2)
    G = dual_point(F, 2, 2)
    assert G.a == pytest.approx(-R2) and G.v == pytest.approx(R2)
    H = dual_point(G, 2, 2)
    assert H.a == pytest.approx(F.a) and H.v == pytest.approx(F.v)
    for A in find_centers(2, "A"):
        assert abs(dual_point(A, 2, 2).a) < 1e-12
    with pytest.raises(NotACenter):
        dual_point(CubicMap(0.8, 1.0), 1, 1)


def test_duality_is_an_involution_on_centers():
    for F in find_centers(2, "D:2"):
        G = dual_point(F, 2, 2)
        assert period_residual(G, 2) < 1e-8
        H = dual_point(G, 2, 2)
        assert abs(H.a - F.a) < 1e-9 and abs(H.v - F.v) < 1e-9


@pytest.fixture(scope="module")
def ray_1_7():
    return trace_parameter_ray("outer", "1/7", G_min=1e-3)


def test_ray_samples_are_on_the_curve(ray_1_7):
    gs = [g for g, _ in ray_1_7.samples]
    assert all(x > y for x, y in zip(gs, gs[1:]))
    for i, (g, _) in enumerate(ray_1_7.samples):
        F = ray_1_7.map_at(i)
        assert period_residual(F, 2) <= 1e-10
        assert parameter_green(F) == pytest.approx(g, rel=1e-6)
        d = (cocritical_angle(F) - 1 / 7) % 1.0
        assert min(d, 1 - d) < 1e-8


def test_ray_stays_in_its_region(ray_1_7):
    # the outer ideal point sits at t = infinity
    assert abs(ray_1_7.samples[0][1]) > abs(ray_1_7.samples[-1][1])


def test_zero_ray_lands_where_2a_is_fixed():
    ray = trace_parameter_ray("outer", "0/1")
    F = ray.map_at()
    # F(2a) = 2a with v = 0 forces 4a^3 = 2a, and a^2 = 1/2 also solves the period-2 condition
    assert abs(F.a - R2) < 1e-5 and abs(F.v) < 1e-5
    assert abs(F(2 * F.a) - 2 * F.a) < 1e-5
    L = classify_landing(ray)
    assert L.kind is LandingKind.MISIUREWICZ and (L.preperiod, L.period) == (1, 1)


def test_ninth_ray_lands_at_an_eventually_fixed_point():
    ray = trace_parameter_ray("outer", "1/9")
    L = classify_landing(ray)
    assert L.kind is LandingKind.MISIUREWICZ and (L.preperiod, L.period) == (2, 1)
    F = ray.map_at()
    w = F(F(2 * F.a))
    assert abs(F(w) - w) < 1e-4
    assert abs(F.derivative(w)) > 1


def test_inner_five_sixths_is_parabolic():
    L = classify_landing(trace_parameter_ray("inner", "5/6"))
    assert L.kind is LandingKind.PARABOLIC and L.ray_period == 1
    assert abs(L.multiplier - 1) < 0.1


def test_misiurewicz_coordinate():
    F0 = CubicMap(R2, 0)
    assert misiurewicz_coordinate(F0, F0) == 0
    t0 = chart_inverse(F0, 2)
    h = 1e-4

    def s(dt):
        return misiurewicz_coordinate(F0, s2_map(t0 + dt))

    # Cauchy-Riemann: d/dx and d/dy differ by a factor of i
    dx = (s(h) - s(-h)) / (2 * h)
    dy = (s(1j * h) - s(-1j * h)) / (2 * h)
    assert abs(dy - 1j * dx) < 1e-6 * max(1.0, abs(dx))


def test_misiurewicz_example_on_s4():
    F0 = CubicMap(-0.185084 - 0.358121j, -0.629660 - 0.752726j)
    z = 2 * F0.a
    assert abs(F0(z) - z) < 1e-4
    assert abs(F0.iterate(F0.a, 4) - F0.a) < 1e-4
    assert abs(misiurewicz_coordinate(F0, F0, tail=(0, 1))) < 1e-4


def test_landing_family_passes_through_the_landing_map():
    family, L = landing_family("inner", "5/6")
    assert chart_inverse(family(0.0), 2) == pytest.approx(L.t, abs=1e-14)
    assert abs(chart_inverse(family(0.1), 2) - L.t) == pytest.approx(0.01)
