"""Cubic polynomials with a periodic critical orbit: exact angle combinatorics,
orbit portraits, external rays, parameter rays and tessellations of S_p."""

from .dynamics import CubicMap
from .exact_angles import Angle
from .portraits import OrbitPortrait

__all__ = ["Angle", "CubicMap", "OrbitPortrait"]
__version__ = "0.1.0"
