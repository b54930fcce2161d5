from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from cubictess.errors import IterationBudgetExceeded, NotCoperiodic, PeriodMismatch
from cubictess.exact_angles import (
    Angle,
    angular_distance,
    co_period,
    coperiodic_angles,
    cycle_of,
    d_of,
    grand_orbit_id,
    is_coperiodic_by_denominator,
    period_under_tripling,
    periodic_angles,
    triad_of,
    twin,
)


def brute_period(x: Fraction, limit: int = 40):
    """Period of x under tripling, found by iterating Fractions directly."""
    y = x
    for n in range(1, limit + 1):
        y = (3 * y) % 1
        if y == x:
            return n
    return None


angles = st.builds(lambda n, d: Angle(n, d), st.integers(0, 10**6), st.integers(1, 2000))


def within_bound(theta):
    try:
        co_period(theta)
        period_under_tripling(theta)
    except IterationBudgetExceeded:
        return False
    return True


def test_parse_and_normalize():
    assert Angle.parse("13/78") == Angle(1, 6)
    assert Angle(7, 6) == Angle(1, 6)
    assert Angle(-1, 3) == Angle(2, 3)
    assert str(Angle(10, 24)) == "5/12"


def test_coperiod_of_reducible_example():
    # 13/78 looks like co-period 3 but reduces to 1/6
    assert co_period(Angle(13, 78)) == 1


@pytest.mark.parametrize("theta,q", [("1/6", 1), ("5/6", 1), ("1/12", 2), ("11/24", 2),
                                     ("53/78", 3), ("0/1", None), ("1/9", None)])
def test_coperiod_examples(theta, q):
    assert co_period(Angle.parse(theta)) == q


def test_triad_and_twin():
    t = triad_of(Angle(5, 6))
    assert t.theta_q == Angle(1, 6) or t.theta_q == Angle(1, 2)
    assert period_under_tripling(t.theta_q) == 1
    assert period_under_tripling(t.theta_hat) is None
    assert twin(Angle(5, 6)) == t.theta_hat
    with pytest.raises(NotCoperiodic):
        triad_of(Angle(0))


def test_long_periods_raise_instead_of_guessing():
    # 3 has multiplicative order 173 modulo 347
    with pytest.raises(IterationBudgetExceeded):
        period_under_tripling(Angle(1, 347))


def test_cycle_rejects_wrong_period():
    with pytest.raises(PeriodMismatch):
        cycle_of(Angle(5, 12), 3)


@pytest.mark.parametrize("q", [1, 2, 3, 4])
def test_periodic_angles_match_brute_force(q):
    d = d_of(q)
    brute = [Angle(n, d) for n in range(d) if brute_period(Fraction(n, d)) == q]
    assert periodic_angles(q) == brute


@pytest.mark.parametrize("q", [1, 2, 3])
def test_coperiodic_angles_match_brute_force(q):
    # every angle whose +-1/3 neighbour is periodic lies over 3(3^q - 1)
    big = 3 * d_of(q)
    brute = []
    for m in range(big):
        x = Fraction(m, big)
        periods = [brute_period((x + s) % 1) for s in (Fraction(1, 3), Fraction(-1, 3))]
        live = [p for p in periods if p is not None]
        if len(live) == 1 and live[0] == q:
            brute.append(Angle(m, big))
    assert coperiodic_angles(q) == brute


def test_grand_orbit_labels():
    assert grand_orbit_id("5/12", 2) == grand_orbit_id("7/12", 2)
    assert grand_orbit_id("5/12", 2) != grand_orbit_id("11/24", 2)


def test_angular_distance():
    assert angular_distance("1/6", "5/6", 1) == 4
    assert angular_distance("5/6", "1/6", 1) == 2


@given(angles)
def test_coperiod_is_period_of_a_neighbour(theta):
    assume(within_bound(theta))
    q = co_period(theta)
    if q is not None:
        assert period_under_tripling(triad_of(theta).theta_q) == q
        assert period_under_tripling(twin(theta)) is None


@given(angles)
def test_coperiodic_denominator_rule(theta):
    assume(within_bound(theta))
    # co-periodic exactly when the reduced denominator is divisible by 3 but not 9
    assert (co_period(theta) is not None) == is_coperiodic_by_denominator(theta)


@given(angles)
def test_tripling_matches_fraction_arithmetic(theta):
    assert (theta * 3).fraction == (3 * theta.fraction) % 1


@given(angles)
def test_twins_triple_together(theta):
    assume(within_bound(theta))
    if co_period(theta) is not None:
        t = triad_of(theta)
        assert t.theta * 3 == t.theta_hat * 3 == t.theta_q * 3


@given(st.integers(1, 4), st.data())
def test_cycle_returns_to_start(q, data):
    theta = data.draw(st.sampled_from(coperiodic_angles(q)))
    cyc = cycle_of(theta, q)
    assert len(cyc) == q
    assert cyc[-1] * 3 == cyc[0]
    assert all(period_under_tripling(x) == q for x in cyc)


def test_cycle_starts_at_the_first_image():
    assert cycle_of(Angle(17, 24), 2) == [Angle(3, 24), Angle(9, 24)]
    assert cycle_of(Angle(53, 78), 3) == [Angle(1, 26), Angle(3, 26), Angle(9, 26)]
    cyc = cycle_of(Angle(61, 726), 5)
    assert cyc[0] == Angle(183, 726)
    # the same cycle listed from its second element
    rotated = [Angle(n, 242) for n in (183, 65, 195, 101, 61)]
    assert cyc == rotated[-1:] + rotated[:-1]
    assert grand_orbit_id("61/726", 5) == grand_orbit_id("65/726", 5)
