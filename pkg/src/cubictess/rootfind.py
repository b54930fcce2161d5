"""Simultaneous polynomial root finding (Aberth-Ehrlich iteration).

The iteration only needs the Newton ratio p/p' at the current estimates, so
it can run on an expanded coefficient vector or directly on a composed map
such as F^n(z) - z without ever expanding it.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .errors import RootFindingFailure

RatioFn = Callable[[np.ndarray], np.ndarray]


def _start_points(n: int, radius: float, center: complex = 0.0) -> np.ndarray:
    # An irrational angular offset keeps the start off any symmetry axis.
    k = np.arange(n)
    return center + radius * np.exp(2j * np.pi * (k + 0.4) / n + 0.7j)


def aberth(ratio: RatioFn, n: int, radius: float, *, tol: float = 1e-14,
           maxit: int = 2000, start: Optional[np.ndarray] = None) -> np.ndarray:
    """All n roots of a degree-n polynomial given through its Newton ratio."""
    z = _start_points(n, radius) if start is None else np.array(start, dtype=complex)
    if n == 0:
        return z
    active = np.ones(n, dtype=bool)
    last = np.full(n, np.inf)
    for _ in range(maxit):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            return z
        r = ratio(z[idx])
        diff = z[idx, None] - z[None, :]
        diff[np.arange(idx.size), idx] = 1.0
        s = (1.0 / diff).sum(axis=1) - 1.0
        with np.errstate(all="ignore"):
            w = r / (1.0 - r * s)
        w = np.where(np.isfinite(w), w, 0.0)
        z[idx] -= w
        scale = np.maximum(1.0, np.abs(z[idx]))
        step = np.abs(w) / scale
        # Converged, or stalled at the rounding floor of an ill-conditioned root.
        done = (step <= tol) | ((step < 1e-6) & (step >= last[idx]))
        last[idx] = step
        active[idx[done]] = False
    raise RootFindingFailure(f"Aberth iteration did not converge for degree {n}")


def horner_ratio(coeffs: np.ndarray) -> RatioFn:
    """Newton ratio p/p' for coefficients given highest degree first."""
    c = np.asarray(coeffs, dtype=complex)

    def ratio(z: np.ndarray) -> np.ndarray:
        p = np.full_like(z, c[0])
        dp = np.zeros_like(z)
        for ck in c[1:]:
            dp = dp * z + p
            p = p * z + ck
        with np.errstate(all="ignore"):
            return p / dp

    return ratio


def poly_roots(coeffs, *, tol: float = 1e-14, maxit: int = 2000) -> np.ndarray:
    """Roots of a polynomial with coefficients highest degree first."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=complex), "f")
    if c.size == 0:
        raise RootFindingFailure("zero polynomial")
    n = c.size - 1
    if n == 0:
        return np.zeros(0, dtype=complex)
    # Fujiwara bound on root moduli.
    ratios = np.abs(c[1:] / c[0]) ** (1.0 / np.arange(1, n + 1))
    ratios[-1] *= 0.5 ** (1.0 / n)
    radius = 2.0 * float(ratios.max()) if n else 1.0
    return aberth(horner_ratio(c), n, max(radius, 1e-3) * 0.5, tol=tol, maxit=maxit)


def dedup(points, radius: float) -> list[complex]:
    """Greedy clustering; keeps the first representative of each cluster."""
    out: list[complex] = []
    for z in points:
        if all(abs(z - w) > radius for w in out):
            out.append(complex(z))
    return out
