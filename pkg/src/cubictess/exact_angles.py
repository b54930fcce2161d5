"""Exact arithmetic on angles in R/Z under the tripling map.

Angles are reduced fractions in [0, 1).  Nothing here touches floating
point, so periods, co-periods and enumerations are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Optional, Union

from .errors import (
    DenominatorMismatch,
    IterationBudgetExceeded,
    NotCoperiodic,
    PeriodMismatch,
)

PERIOD_BOUND = 64
THIRD = Fraction(1, 3)


@total_ordering
class Angle:
    """A point of R/Z stored as a reduced fraction num/den with 0 <= num < den."""

    __slots__ = ("_value",)

    def __init__(self, num: Union[int, Fraction, "Angle"], den: int = 1):
        if isinstance(num, Angle):
            value = num._value
        else:
            value = Fraction(num, den)
        self._value = value - (value.numerator // value.denominator)

    @classmethod
    def parse(cls, text: str) -> "Angle":
        """Parse "num/den" (or a bare integer)."""
        text = text.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            return cls(int(num), int(den))
        return cls(int(text))

    @property
    def num(self) -> int:
        return self._value.numerator

    @property
    def den(self) -> int:
        return self._value.denominator

    @property
    def fraction(self) -> Fraction:
        return self._value

    def __add__(self, other: Union["Angle", Fraction, int]) -> "Angle":
        other = other._value if isinstance(other, Angle) else Fraction(other)
        return Angle(self._value + other)

    def __sub__(self, other: Union["Angle", Fraction, int]) -> "Angle":
        other = other._value if isinstance(other, Angle) else Fraction(other)
        return Angle(self._value - other)

    def __mul__(self, k: int) -> "Angle":
        return Angle(self._value * k)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Angle):
            return self._value == other._value
        return NotImplemented

    def __lt__(self, other: "Angle") -> bool:
        return self._value < other._value

    def __hash__(self) -> int:
        return hash(("Angle", self._value))

    def __float__(self) -> float:
        return float(self._value)

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"

    def __repr__(self) -> str:
        return f"Angle({self.num}, {self.den})"

    def numerator_over(self, den: int) -> int:
        """Numerator of this angle written over ``den``."""
        scaled = self._value * den
        if scaled.denominator != 1:
            raise DenominatorMismatch(f"{self} cannot be written over {den}")
        return scaled.numerator


AngleLike = Union[Angle, str, Fraction]


def as_angle(x: AngleLike) -> Angle:
    if isinstance(x, Angle):
        return x
    if isinstance(x, str):
        return Angle.parse(x)
    return Angle(x)


def d_of(q: int) -> int:
    """The periodic denominator 3^q - 1."""
    return 3**q - 1


@dataclass(frozen=True)
class Triad:
    theta: Angle
    theta_q: Angle
    theta_hat: Angle


@dataclass(frozen=True, order=True)
class GrandOrbitId:
    q: int
    label: int


def triple(theta: AngleLike) -> Angle:
    return as_angle(theta) * 3


def period_under_tripling(theta: AngleLike) -> Optional[int]:
    """Smallest q >= 1 with 3^q theta = theta, or None if theta is not periodic."""
    theta = as_angle(theta)
    den = theta.den
    if den % 3 == 0:
        return None
    num = theta.num
    x = num
    for q in range(1, PERIOD_BOUND + 1):
        x = (3 * x) % den
        if x == num:
            return q
    raise IterationBudgetExceeded(f"period of {theta} exceeds {PERIOD_BOUND}")


def co_period(theta: AngleLike) -> Optional[int]:
    """Co-period of theta: the period of whichever of theta +- 1/3 is periodic."""
    theta = as_angle(theta)
    plus = period_under_tripling(theta + THIRD)
    minus = period_under_tripling(theta - THIRD)
    if (plus is None) == (minus is None):
        return None
    return plus if plus is not None else minus


def is_coperiodic_by_denominator(theta: AngleLike) -> bool:
    """Reduced denominator divisible by three but not by nine."""
    den = as_angle(theta).den
    return den % 3 == 0 and den % 9 != 0


def triad_of(theta: AngleLike) -> Triad:
    theta = as_angle(theta)
    plus, minus = theta + THIRD, theta - THIRD
    if period_under_tripling(plus) is not None and period_under_tripling(minus) is None:
        return Triad(theta, plus, minus)
    if period_under_tripling(minus) is not None and period_under_tripling(plus) is None:
        return Triad(theta, minus, plus)
    raise NotCoperiodic(f"{theta} is not co-periodic")


def twin(theta: AngleLike) -> Angle:
    return triad_of(theta).theta_hat


def _period_or_coperiod(theta: Angle) -> Optional[int]:
    p = period_under_tripling(theta)
    return p if p is not None else co_period(theta)


def cycle_of(theta: AngleLike, q: int) -> list[Angle]:
    """The cycle theta_j = 3^j theta, j = 1..q, of a periodic or co-periodic angle."""
    theta = as_angle(theta)
    if _period_or_coperiod(theta) != q:
        raise PeriodMismatch(f"{theta} has neither period nor co-period {q}")
    out = []
    x = theta
    for _ in range(q):
        x = triple(x)
        out.append(x)
    return out


def grand_orbit_id(theta: AngleLike, q: int) -> GrandOrbitId:
    d = d_of(q)
    return GrandOrbitId(q, min(a.numerator_over(d) for a in cycle_of(theta, q)))


def periodic_angles(q: int) -> list[Angle]:
    """All angles of exact period q, sorted."""
    d = d_of(q)
    return [Angle(n, d) for n in range(d) if period_under_tripling(Angle(n, d)) == q]


def coperiodic_angles(q: int) -> list[Angle]:
    """All angles of exact co-period q, sorted.

    Candidates are m / (3(3^q - 1)) with m prime to 3.
    """
    if q < 1:
        raise ValueError("q must be positive")
    big = 3 * d_of(q)
    return [Angle(m, big) for m in range(big) if m % 3 and co_period(Angle(m, big)) == q]


def angular_distance(theta: AngleLike, eta: AngleLike, q: int) -> int:
    """The integer 0 <= D < 3d with D = (eta - theta) * 3d mod 3d, d = 3^q - 1."""
    big = 3 * d_of(q)
    a = as_angle(theta).numerator_over(big)
    b = as_angle(eta).numerator_over(big)
    return (b - a) % big


def numerators(angles: Iterable[Angle], den: int) -> list[int]:
    return [a.numerator_over(den) for a in angles]
