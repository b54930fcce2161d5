"""Exact counts for the curves S_p and their tessellations.

Everything is integer (or rational) arithmetic.  The escape-region counts
N_p cannot be derived cheaply and are stored as a table; every other number
is computed.  Counts that rely on a conjecture are returned as ``Flagged``
values naming the assumption.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .errors import Inconsistent, OutOfTable

# N_p for p = 1..9 (a known enumeration, not derived here).
ESCAPE_REGIONS = {1: 1, 2: 2, 3: 8, 4: 20, 5: 56, 6: 144, 7: 404, 8: 1112, 9: 3120}

# Topology of the 1-skeleton for the tabulated tessellations Tes_q(S_p):
# (q, p) -> (connected components, rank of the image of H1(faces) -> H1(S_p)).
SKELETON_TOPOLOGY = {
    (1, 1): (1, 0), (2, 1): (1, 0), (3, 1): (1, 0),
    (1, 2): (2, 0), (2, 2): (1, 0), (3, 2): (2, 0),
    (1, 3): (8, 2), (2, 3): (3, 0), (3, 3): (1, 0),
}

MC1 = "MC1"
SIMPLY_CONNECTED_FACES = "all faces simply connected"


@dataclass(frozen=True)
class Flagged:
    """An integer that holds only under a named conjecture."""

    value: int
    assumption: str

    def __int__(self) -> int:
        return self.value

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Flagged):
            return (self.value, self.assumption) == (other.value, other.assumption)
        if isinstance(other, int):
            return self.value == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.value)


@dataclass(frozen=True)
class CurveStats:
    p: int
    d_p: int
    N_p: int
    chi: int
    genus: int


@dataclass(frozen=True)
class TessStats:
    q: int
    p: int
    v_ideal: int
    v_par: int
    e: int
    f: int
    chi: int
    h1_kernel_rank: int
    h1_image_rank: int

    def euler_holds(self) -> bool:
        lhs = self.v_ideal + self.v_par - self.e + self.f
        return lhs == self.chi + self.h1_kernel_rank + self.h1_image_rank

    def to_json(self) -> dict:
        return asdict(self)


def _divisors(n: int) -> list[int]:
    return [k for k in range(1, n + 1) if n % k == 0]


@lru_cache(maxsize=None)
def degree(p: int) -> int:
    """d_p, defined by 3^(n-1) = sum of d_k over the divisors k of n."""
    if p < 1:
        raise ValueError("p must be positive")
    return 3 ** (p - 1) - sum(degree(k) for k in _divisors(p) if k < p)


def escape_region_count(p: int) -> int:
    try:
        return ESCAPE_REGIONS[p]
    except KeyError:
        raise OutOfTable(f"N_p is tabulated only for 1 <= p <= 9, not {p}") from None


def angle_counts(q: int) -> tuple[int, int]:
    """(number of period-q angles, number of co-period-q angles)."""
    periodic = 2 if q == 1 else 3 * degree(q)
    return periodic, 2 * periodic


def edge_count(q: int, p: int) -> int:
    return 4 * degree(p) if q == 1 else 6 * degree(q) * degree(p)


def parabolic_vertex_count(q: int, p: int) -> Flagged:
    dp = degree(p)
    value = 3 * dp * dp - p * dp if p == q else 3 * degree(q) * dp
    return Flagged(value, MC1)


def b_component_count(m: int, n: int) -> int:
    if m <= 0 or n <= 0:
        raise ValueError("m and n must be positive")
    return degree(m + n)


def b_intersection_count(p: int) -> int:
    """Points where F^m(a) = -a meets F^n(-a) = a, for m + n = p."""
    return 3 ** (p - 1)


def curve_stats(p: int) -> CurveStats:
    dp, Np = degree(p), escape_region_count(p)
    chi = Np + (2 - p) * dp
    twice = (p - 2) * dp - Np
    if twice % 2:
        raise Inconsistent("genus is not an integer")
    return CurveStats(p, dp, Np, chi, 1 + twice // 2)


def face_count(q: int, p: int, h1_rank: int) -> int:
    """Faces from v - e + f = chi + rank H1(faces)."""
    v = escape_region_count(p) + parabolic_vertex_count(q, p).value
    return curve_stats(p).chi + h1_rank - v + edge_count(q, p)


def face_count_closed_form(p: int) -> Flagged:
    """3 d_p^2 + 2 d_p, valid when p = q > 1 and every face is simply connected."""
    dp = degree(p)
    return Flagged(3 * dp * dp + 2 * dp, SIMPLY_CONNECTED_FACES)


def split_genus(chi_total: int, chi_piece: int, n_circles: int) -> int:
    """Genus of the complementary piece when a closed surface is cut along circles.

    Cutting along circles does not change the Euler characteristic, and a
    genus g surface with n boundary circles has chi = 2 - 2g - n.
    """
    chi_other = chi_total - chi_piece
    if n_circles < 0:
        raise Inconsistent("negative number of circles")
    if n_circles == 0:
        if chi_other != 0:
            raise Inconsistent("a connected surface cannot split along zero circles")
        return 0
    twice_g = 2 - n_circles - chi_other
    if twice_g < 0 or twice_g % 2:
        raise Inconsistent(f"no genus solves chi = {chi_other} with {n_circles} circles")
    return twice_g // 2


def lefschetz_ranks(components: int, genus: int, image_rank: int,
                    dual_image_rank: Optional[int] = None) -> tuple[int, int]:
    """(kernel rank, total rank of H1 of the faces) from the 1-skeleton topology."""
    if components < 1:
        raise ValueError("the 1-skeleton has at least one component")
    if dual_image_rank is not None and image_rank + dual_image_rank != 2 * genus:
        raise Inconsistent("image ranks do not add up to 2g")
    kernel = components - 1
    return kernel, kernel + image_rank


def average_multiplicity(p: int) -> Fraction:
    return Fraction(degree(p), escape_region_count(p))


def tess_stats(q: int, p: int, components: Optional[int] = None,
               image_rank: Optional[int] = None) -> TessStats:
    """Table row for Tes_q(S_p).

    The skeleton topology defaults to the tabulated values; pass measured
    ones to evaluate other cases.
    """
    if components is None or image_rank is None:
        if (q, p) not in SKELETON_TOPOLOGY:
            raise OutOfTable(f"no skeleton topology on record for (q, p) = ({q}, {p})")
        components, image_rank = SKELETON_TOPOLOGY[(q, p)]
    stats = curve_stats(p)
    kernel, total = lefschetz_ranks(components, stats.genus, image_rank)
    return TessStats(
        q=q,
        p=p,
        v_ideal=escape_region_count(p),
        v_par=parabolic_vertex_count(q, p).value,
        e=edge_count(q, p),
        f=face_count(q, p, total),
        chi=stats.chi,
        h1_kernel_rank=kernel,
        h1_image_rank=image_rank,
    )


def tables_csv(max_p: int = 9, max_q: int = 8) -> str:
    """Tables 1-4 as consecutive CSV blocks separated by blank lines."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["table", "p", "d_p"])
    for p in range(1, max_p + 1):
        w.writerow([1, p, degree(p)])
    buf.write("\n")
    w.writerow(["table", "p", "N_p"])
    for p in range(1, max_p + 1):
        w.writerow([2, p, escape_region_count(p)])
    buf.write("\n")
    w.writerow(["table", "q", "periodic", "coperiodic"])
    for q in range(1, max_q + 1):
        w.writerow([3, q, *angle_counts(q)])
    buf.write("\n")
    w.writerow(["table", "q", "p", "v_ideal", "v_par", "e", "f", "chi",
                "h1_kernel_rank", "h1_image_rank"])
    for p in range(1, 4):
        for q in range(1, 4):
            s = tess_stats(q, p)
            w.writerow([4, s.q, s.p, s.v_ideal, s.v_par, s.e, s.f, s.chi,
                        s.h1_kernel_rank, s.h1_image_rank])
    return buf.getvalue()
