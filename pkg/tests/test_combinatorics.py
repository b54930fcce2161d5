from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from cubictess.combinatorics import (
    MC1,
    Flagged,
    angle_counts,
    average_multiplicity,
    b_component_count,
    b_intersection_count,
    curve_stats,
    degree,
    edge_count,
    escape_region_count,
    face_count,
    face_count_closed_form,
    lefschetz_ranks,
    parabolic_vertex_count,
    split_genus,
    tables_csv,
    tess_stats,
)
from cubictess.errors import Inconsistent, OutOfTable
from cubictess.exact_angles import d_of

from goldens import TABLE_ANGLES, TABLE_D, TABLE_N, TABLE_TESS


def mobius_degree(p: int) -> int:
    """Independent route: Möbius inversion of 3^(n-1) = sum of d_k over k | n."""
    return sum(sympy.mobius(p // k) * 3 ** (k - 1) for k in sympy.divisors(p))


def brute_periodic_count(q: int) -> int:
    d = d_of(q)
    count = 0
    for n in range(d):
        x, k = n, 0
        while True:
            x = (3 * x) % d
            k += 1
            if x == n:
                break
        count += k == q
    return count


@pytest.mark.parametrize("p", range(1, 10))
def test_degree_table(p):
    assert degree(p) == TABLE_D[p - 1] == mobius_degree(p)


@pytest.mark.parametrize("n", range(1, 21))
def test_degree_recursion(n):
    assert sum(degree(k) for k in sympy.divisors(n)) == 3 ** (n - 1)


@pytest.mark.parametrize("p", range(1, 10))
def test_escape_regions(p):
    assert escape_region_count(p) == TABLE_N[p - 1]


def test_escape_regions_out_of_table():
    with pytest.raises(OutOfTable):
        escape_region_count(10)


@pytest.mark.parametrize("q", range(1, 9))
def test_angle_counts(q):
    assert angle_counts(q) == TABLE_ANGLES[q - 1]


@pytest.mark.parametrize("q", range(1, 6))
def test_angle_counts_brute_force(q):
    assert angle_counts(q)[0] == brute_periodic_count(q)


def test_edge_counts():
    assert edge_count(3, 3) == 384
    assert edge_count(1, 3) == 32
    assert edge_count(5, 5) == 38400


def test_vertex_counts_are_flagged():
    v = parabolic_vertex_count(3, 3)
    assert v == 168 and isinstance(v, Flagged) and v.assumption == MC1
    assert parabolic_vertex_count(2, 1) == 6
    assert parabolic_vertex_count(3, 2) == 48


def test_b_counts():
    assert b_component_count(1, 1) == 2
    assert b_component_count(2, 2) == 24
    assert b_intersection_count(3) == 9


@pytest.mark.parametrize("qp", sorted(TABLE_TESS))
def test_tessellation_table(qp):
    q, p = qp
    s = tess_stats(q, p)
    row = (s.v_ideal, s.v_par, s.e, s.f, s.chi, s.h1_kernel_rank, s.h1_image_rank)
    assert row == TABLE_TESS[qp]
    assert s.euler_holds()


def test_curve_stats():
    assert curve_stats(3).chi == 0
    assert curve_stats(4).chi == -28
    assert curve_stats(2).genus == 0
    assert face_count(2, 2, 0) == 16


@pytest.mark.parametrize("p", range(1, 10))
def test_curve_bounds(p):
    s = curve_stats(p)
    assert 2 - 2 * s.genus == s.chi
    assert s.genus > Fraction((p - 3) * s.d_p, 2)
    assert p - 3 <= Fraction(-s.chi, s.d_p) < p - 2


@pytest.mark.parametrize("p", [2, 3])
def test_face_closed_form_matches_table(p):
    assert face_count_closed_form(p) == TABLE_TESS[(p, p)][3]


def test_split_genus():
    assert split_genus(-28, -2, 4) == 12
    assert split_genus(2, 2, 0) == 0
    assert split_genus(0, -1, 1) == 0
    with pytest.raises(Inconsistent):
        split_genus(0, 0, 1)


def test_lefschetz():
    assert lefschetz_ranks(1, 0, 0) == (0, 0)
    assert lefschetz_ranks(8, 1, 2) == (7, 9)
    assert lefschetz_ranks(3, 1, 0) == (2, 2)
    with pytest.raises(Inconsistent):
        lefschetz_ranks(1, 1, 1, dual_image_rank=0)


def test_average_multiplicity():
    assert average_multiplicity(2) == 1
    assert average_multiplicity(4) == Fraction(6, 5)
    assert average_multiplicity(9) == Fraction(6552, 3120)


def test_tables_csv_blocks():
    blocks = tables_csv().strip().split("\n\n")
    assert len(blocks) == 4
    assert blocks[3].splitlines()[-1] == "4,3,3,8,168,384,208,0,0,0"


@given(st.integers(1, 3), st.integers(1, 3))
def test_euler_from_counts(q, p):
    s = tess_stats(q, p)
    assert s.v_ideal + s.v_par - s.e + s.f == s.chi + s.h1_kernel_rank + s.h1_image_rank


@given(st.integers(1, 9))
def test_curve_invariants(p):
    s = curve_stats(p)
    assert s.chi == s.N_p + (2 - p) * s.d_p
    assert 2 * (s.genus - 1) == (p - 2) * s.d_p - s.N_p
