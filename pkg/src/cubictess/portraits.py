"""Orbit portraits as exact combinatorial objects.

A portrait of period q is a partition of the period-q angles; only the
classes with two or more members are stored.  Internally every angle is a
numerator over d = 3^q - 1, which makes tripling plain modular arithmetic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import (
    GrandOrbitClash,
    Inconsistent,
    NoCondition,
    NoShift,
    NotCoperiodic,
    PeriodMismatch,
)
from .exact_angles import (
    Angle,
    AngleLike,
    angular_distance,
    as_angle,
    co_period,
    cycle_of,
    d_of,
    grand_orbit_id,
    period_under_tripling,
    twin,
)


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[int, int] = {}

    def find(self, x: int) -> int:
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        self.parent[max(rx, ry)] = min(rx, ry)
        return True

    def classes(self) -> list[list[int]]:
        groups: dict[int, list[int]] = {}
        for x in self.parent:
            groups.setdefault(self.find(x), []).append(x)
        return [sorted(g) for g in groups.values()]


def _canonical(classes: Iterable[Iterable[int]]) -> tuple[tuple[int, ...], ...]:
    return tuple(sorted(tuple(sorted(set(c))) for c in classes if len(set(c)) > 1))


@dataclass(frozen=True)
class OrbitPortrait:
    """Partition of the period-q angles into landing classes (numerators over 3^q - 1)."""

    q: int
    classes: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self) -> None:
        canon = _canonical(self.classes)
        seen: set[int] = set()
        d = d_of(self.q)
        for cls in canon:
            for n in cls:
                if n in seen:
                    raise Inconsistent(f"angle {n}/{d} appears in two classes")
                seen.add(n)
                if period_under_tripling(Angle(n, d)) != self.q:
                    raise PeriodMismatch(f"{n}/{d} does not have period {self.q}")
        object.__setattr__(self, "classes", canon)

    @classmethod
    def from_angles(cls, q: int, classes: Iterable[Iterable[AngleLike]]) -> "OrbitPortrait":
        d = d_of(q)
        return cls(q, tuple(tuple(as_angle(a).numerator_over(d) for a in c) for c in classes))

    @classmethod
    def from_relations(cls, q: int, pairs: Iterable[tuple[int, int]]) -> "OrbitPortrait":
        uf = _UnionFind()
        for x, y in pairs:
            uf.union(x, y)
        return cls(q, tuple(tuple(c) for c in uf.classes()))

    @property
    def den(self) -> int:
        return d_of(self.q)

    def angle_classes(self) -> list[list[Angle]]:
        return [[Angle(n, self.den) for n in c] for c in self.classes]

    def pairs(self) -> set[frozenset[int]]:
        """The relation as a set of unordered pairs of distinct numerators."""
        out: set[frozenset[int]] = set()
        for c in self.classes:
            for i, x in enumerate(c):
                for y in c[i + 1:]:
                    out.add(frozenset((x, y)))
        return out

    def to_json(self) -> dict:
        return {"q": self.q, "den": self.den, "classes": [list(c) for c in self.classes]}

    @classmethod
    def from_json(cls, data: dict) -> "OrbitPortrait":
        q = int(data["q"])
        if int(data.get("den", d_of(q))) != d_of(q):
            raise Inconsistent("den does not equal 3^q - 1")
        return cls(q, tuple(tuple(int(n) for n in c) for c in data["classes"]))

    def __str__(self) -> str:
        body = ", ".join("≃".join(str(n) for n in c) for c in self.classes)
        return "{" + body + "}/" + str(self.den)


class EdgeKind(str, enum.Enum):
    INACTIVE = "Inactive"
    PRIMARY = "Primary"
    SECONDARY = "Secondary"


# -- validity -----------------------------------------------------------------

def _separates(chord: Sequence[int], other: Sequence[int]) -> bool:
    """True if ``other`` meets more than one complementary arc of ``chord``."""
    pts = sorted(chord)

    def arc(x: int) -> int:
        # index of the arc (pts[i], pts[i+1]) containing x
        for i in range(len(pts) - 1):
            if pts[i] < x < pts[i + 1]:
                return i
        return len(pts) - 1

    return len({arc(x) for x in other}) > 1


def is_unlinked(P: OrbitPortrait) -> bool:
    """No two classes interleave on the circle."""
    cls = P.classes
    for i in range(len(cls)):
        for j in range(i + 1, len(cls)):
            if _separates(cls[i], cls[j]):
                return False
    return True


def _rotation_of(seq: Sequence[int], target: Sequence[int]) -> bool:
    n = len(seq)
    if n != len(target):
        return False
    if n == 0:
        return True
    try:
        k = list(target).index(seq[0])
    except ValueError:
        return False
    return all(target[(k + i) % n] == seq[i] for i in range(n))


def is_formal(P: OrbitPortrait) -> bool:
    """Unlinked, tripling-invariant, and cyclic order kept by each return map."""
    if not is_unlinked(P):
        return False
    d = P.den
    class_set = set(P.classes)
    for c in P.classes:
        image = tuple(sorted((3 * n) % d for n in c))
        if image not in class_set:
            return False
    for c in P.classes:
        # smallest k with 3^k c = c setwise
        power = 3 % d
        while tuple(sorted((power * n) % d for n in c)) != c:
            power = (power * 3) % d
        images = [(power * n) % d for n in c]
        if not _rotation_of(images, c):
            return False
    return True


# -- amalgamation ---------------------------------------------------------------

def _check_same_q(*portraits: OrbitPortrait) -> int:
    qs = {P.q for P in portraits}
    if len(qs) != 1:
        raise PeriodMismatch(f"portraits of different periods {sorted(qs)}")
    return qs.pop()


def join(*portraits: OrbitPortrait) -> OrbitPortrait:
    """Join of the partitions, with no further merging."""
    q = _check_same_q(*portraits)
    uf = _UnionFind()
    for P in portraits:
        for c in P.classes:
            for n in c[1:]:
                uf.union(c[0], n)
    return OrbitPortrait(q, tuple(tuple(c) for c in uf.classes()))


def formal_closure(P: OrbitPortrait) -> OrbitPortrait:
    """Smallest relation containing P that is unlinked and closed under tripling.

    Both moves are forced for actual portraits: rays of crossing chords must
    share their landing point, and F carries a landing point to a landing
    point.  The result need not preserve cyclic order; ``is_formal`` decides.
    """
    d = P.den
    uf = _UnionFind()
    for c in P.classes:
        for n in c[1:]:
            uf.union(c[0], n)
    changed = True
    while changed:
        changed = False
        current = [c for c in uf.classes() if len(c) > 1]
        for c in current:
            img = [(3 * n) % d for n in c]
            for n in img[1:]:
                changed |= uf.union(img[0], n)
        current = [c for c in uf.classes() if len(c) > 1]
        for i in range(len(current)):
            for j in range(i + 1, len(current)):
                if _separates(current[i], current[j]):
                    changed |= uf.union(current[i][0], current[j][0])
    return OrbitPortrait(P.q, tuple(tuple(c) for c in uf.classes()))


def amalgamate(*portraits: OrbitPortrait) -> OrbitPortrait:
    """Smallest relation containing all the given ones that a portrait could be.

    Two period-2 pairs such as {1/8 = 3/8} and {2/8 = 6/8} have crossing
    chords, so they amalgamate into the single class {1/8 = 2/8 = 3/8 = 6/8}.
    """
    return formal_closure(join(*portraits))


def compatible(*portraits: OrbitPortrait) -> bool:
    """True if the portraits all lie in one common formal portrait."""
    return is_formal(amalgamate(*portraits))


def size(P: OrbitPortrait) -> int:
    return sum(len(c) * (len(c) - 1) // 2 for c in P.classes)


def contains(big: OrbitPortrait, small: OrbitPortrait) -> bool:
    """Relation containment: every relation of ``small`` holds in ``big``."""
    return small.pairs() <= big.pairs()


def classify_edge(side1: OrbitPortrait, side2: OrbitPortrait) -> EdgeKind:
    _check_same_q(side1, side2)
    r1, r2 = side1.pairs(), side2.pairs()
    if r1 == r2:
        return EdgeKind.INACTIVE
    if r1 < r2 or r2 < r1:
        return EdgeKind.PRIMARY
    return EdgeKind.SECONDARY


def jump_set(psi: AngleLike):
    """Grand orbit of the dynamic rays that jump across the psi parameter ray."""
    psi = as_angle(psi)
    q = co_period(psi)
    if q is None:
        raise NotCoperiodic(f"{psi} is not co-periodic")
    return grand_orbit_id(psi, q)


# -- local models around parabolic vertices -------------------------------------------

@dataclass(frozen=True)
class LocalModel:
    q: int
    angles: tuple[Angle, ...]
    faces: tuple[OrbitPortrait, ...]
    background: OrbitPortrait
    shift: tuple[int, ...] = ()


def _require_coperiod(angles: Sequence[Angle], q: int) -> None:
    for a in angles:
        c = co_period(a)
        if c is None:
            raise NotCoperiodic(f"{a} is not co-periodic")
        if c != q:
            raise PeriodMismatch(f"{a} has co-period {c}, not {q}")


def _cycle_nums(theta: Angle, q: int) -> list[int]:
    d = d_of(q)
    return [a.numerator_over(d) for a in cycle_of(theta, q)]


def _with_background(P: OrbitPortrait, background: Optional[OrbitPortrait]) -> OrbitPortrait:
    return P if background is None else amalgamate(P, background)


def two_ray_faces(alpha: AngleLike, beta: AngleLike, q: int,
                  background: Optional[OrbitPortrait] = None) -> LocalModel:
    a, b = as_angle(alpha), as_angle(beta)
    if a == b:
        raise Inconsistent("the two parameter angles coincide")
    _require_coperiod([a, b], q)
    ca, cb = _cycle_nums(a, q), _cycle_nums(b, q)
    f1 = OrbitPortrait.from_relations(q, zip(ca, cb))
    empty = OrbitPortrait(q)
    bg = background or empty
    return LocalModel(q, (a, b), (_with_background(f1, background), bg), bg)


def three_ray_faces(alpha: AngleLike, beta: AngleLike, gamma: AngleLike, q: int,
                    background: Optional[OrbitPortrait] = None) -> LocalModel:
    a, b, g = (as_angle(x) for x in (alpha, beta, gamma))
    _require_coperiod([a, b, g], q)
    ga, gb, gg = (grand_orbit_id(x, q) for x in (a, b, g))
    if ga == gb or gb == gg or gg == ga:
        raise GrandOrbitClash("three-ray model needs three distinct grand orbits")
    ca, cb, cg = (_cycle_nums(x, q) for x in (a, b, g))
    f1 = OrbitPortrait.from_relations(q, list(zip(ca, cb)) + list(zip(cb, cg)))
    f2 = OrbitPortrait.from_relations(q, zip(ca, cg))
    f3 = OrbitPortrait.from_relations(q, zip(cb, cg))
    if amalgamate(f2, f3) != f1:
        raise Inconsistent("F1 is not the amalgamation of the side faces")
    faces = tuple(_with_background(f, background) for f in (f1, f2, f3))
    return LocalModel(q, (a, b, g), faces, background or OrbitPortrait(q))


def four_ray_shifts(alpha: AngleLike, beta: AngleLike, gamma: AngleLike, delta: AngleLike,
                    q: int) -> list[int]:
    """All non-zero k in Z/q with gamma_j = alpha_{j+k} and beta_j = delta_{j+k}."""
    ca, cb, cg, cd = (_cycle_nums(as_angle(x), q) for x in (alpha, beta, gamma, delta))
    out = []
    for k in range(1, q):
        if all(cg[j] == ca[(j + k) % q] and cb[j] == cd[(j + k) % q] for j in range(q)):
            out.append(k)
    return out


def four_ray_faces(alpha: AngleLike, beta: AngleLike, gamma: AngleLike, delta: AngleLike,
                   q: int, background: Optional[OrbitPortrait] = None) -> LocalModel:
    a, b, g, dl = (as_angle(x) for x in (alpha, beta, gamma, delta))
    _require_coperiod([a, b, g, dl], q)
    ga, gb, gg, gd = (grand_orbit_id(x, q) for x in (a, b, g, dl))
    if not (ga == gg and gb == gd and ga != gb):
        raise GrandOrbitClash("four-ray model needs ((alpha))=((gamma)) != ((beta))=((delta))")
    shifts = four_ray_shifts(a, b, g, dl, q)
    if not shifts:
        raise NoShift("no shift k relates the four cycles")
    ca, cb, cg, cd = (_cycle_nums(x, q) for x in (a, b, g, dl))
    f1 = OrbitPortrait.from_relations(
        q, list(zip(ca, cb)) + list(zip(cb, cg)) + list(zip(cg, cd)))
    f2 = OrbitPortrait.from_relations(q, zip(ca, cg))
    f4 = OrbitPortrait.from_relations(q, zip(cb, cd))
    f3 = OrbitPortrait.from_relations(q, list(zip(ca, cd)) + list(zip(cb, cg)))
    if amalgamate(f2, f4) != f1:
        raise Inconsistent("F1 is not the amalgamation of F2 and F4")
    faces = tuple(_with_background(f, background) for f in (f1, f2, f3, f4))
    return LocalModel(q, (a, b, g, dl), faces, background or OrbitPortrait(q), tuple(shifts))


@dataclass(frozen=True)
class ACenteredResult:
    alpha: Angle
    beta: Angle
    gamma: Angle
    w: int
    w_prime: int
    width_gamma_alpha: int


def a_centered_check(alpha: AngleLike, beta: AngleLike, gamma: AngleLike,
                     q: int) -> ACenteredResult:
    """Angles at the opposite root of a Type-A component, with the width identity."""
    a, b, g = (as_angle(x) for x in (alpha, beta, gamma))
    _require_coperiod([a, b, g], q)
    ga, gb, gg = (grand_orbit_id(x, q) for x in (a, b, g))
    if ga == gb or gb == gg or gg == ga:
        raise GrandOrbitClash("three-ray hypotheses fail")
    a2, b2, g2 = twin(b), twin(g), twin(a)
    d = d_of(q)
    w = angular_distance(a, b, q)
    w2 = angular_distance(a2, b2, q)
    width = angular_distance(g, a, q)
    if width != d - w - w2:
        raise Inconsistent(f"width identity fails: {width} != {d} - {w} - {w2}")
    return ACenteredResult(a2, b2, g2, w, w2, width)


class Condition(str, enum.Enum):
    CONDITION1 = "Condition1"
    CONDITION2 = "Condition2"
    CONDITION3 = "Condition3"


def adjacent_three_ray_conditions(left: Sequence[AngleLike], right: Sequence[AngleLike],
                                  q: int) -> list[Condition]:
    """Every grand-orbit pattern satisfied by two adjacent three-ray configurations."""
    a, b, g = (grand_orbit_id(x, q) for x in left)
    a2, b2, g2 = (grand_orbit_id(x, q) for x in right)
    found = []
    if a == g2 and g == b2 and a != g:
        found.append(Condition.CONDITION1)
    if g == g2 and a == b2 and g != a:
        found.append(Condition.CONDITION2)
    if g == g2 and (a == a2 or b == b2):
        found.append(Condition.CONDITION3)
    return found


def adjacent_three_ray_condition(left: Sequence[AngleLike], right: Sequence[AngleLike],
                                 q: int) -> Condition:
    found = adjacent_three_ray_conditions(left, right, q)
    if not found:
        raise NoCondition("none of the three grand-orbit patterns holds")
    return found[0]
