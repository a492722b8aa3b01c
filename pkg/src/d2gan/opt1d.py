"""Small deterministic 1-D solvers: grid scan + golden section, bisection.

The scan guards against non-unimodal objectives; golden section then
refines the bracketing interval around the best grid point.
"""

from __future__ import annotations

import math

import numpy as np

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0  # 1/phi^2


class UnboundedObjectiveError(RuntimeError):
    """The maximum sits on the scan boundary: the objective looks unbounded
    (or its maximizer falls outside the scan range)."""


def golden_max(f, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200):
    """Golden-section maximization on [lo, hi]; returns (x*, f(x*)).

    Only interior points are evaluated, so infinite endpoint values are
    allowed. Assumes f is unimodal on the bracket.
    """
    a, b = float(lo), float(hi)
    h = b - a
    c = a + _INVPHI2 * h
    d = a + _INVPHI * h
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if h <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + _INVPHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INVPHI * h
            fd = f(d)
    if fc >= fd:
        return c, fc
    return d, fd


def scan_golden_max(f, grid: np.ndarray, tol: float = 1e-10):
    """Maximize a vectorizable f over a 1-D grid, then refine by golden
    section on the interval bracketing the best grid point.

    Raises UnboundedObjectiveError when the best grid point is an endpoint.
    """
    grid = np.asarray(grid, dtype=np.float64)
    vals = np.asarray(f(grid), dtype=np.float64)
    vals = np.where(np.isfinite(vals), vals, -np.inf)
    i = int(np.argmax(vals))
    if i == 0 or i == len(grid) - 1:
        raise UnboundedObjectiveError(
            f"maximum at scan boundary t={grid[i]:g} (value {vals[i]:g})"
        )
    x, fx = golden_max(lambda t: float(f(t)), grid[i - 1], grid[i + 1], tol=tol)
    # The refined point can only improve on the grid point.
    if vals[i] > fx:
        return float(grid[i]), float(vals[i])
    return float(x), float(fx)


def scan_golden_min(f, grid: np.ndarray, tol: float = 1e-10):
    """Minimization twin of `scan_golden_max`."""
    x, fx = scan_golden_max(lambda t: -np.asarray(f(t)), grid, tol=tol)
    return x, -fx


def log_grid(lo: float = 1e-6, hi: float = 1e6, n: int = 2001) -> np.ndarray:
    return np.logspace(math.log10(lo), math.log10(hi), n)


def bisect_root(f, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200) -> float:
    """Bisection for a sign change on [lo, hi]; returns early on an exact
    zero at the midpoint (so symmetric problems resolve exactly)."""
    a, b = float(lo), float(hi)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise ValueError("bisection endpoints must bracket a sign change")
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0 or (b - a) <= tol:
            return m
        if (fm < 0.0) == (fa < 0.0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)
