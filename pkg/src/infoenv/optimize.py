"""Deterministic scalar minimization over an open interval.

Every infimum over a free parameter in the toolkit goes through
:func:`optimize_scalar`: a grid (logarithmic by default) locates the best
cell, golden-section search refines inside the neighbouring cells.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

# default theta search: log grid over [1e-4, 1e3] intersected with the domain
THETA_LO = 1e-4
THETA_HI = 1e3
N_GRID = 200
RTOL = 1e-6
OPEN_BOUND_RTOL = 1e-9


class OptimizeResult(NamedTuple):
    x: float
    fun: float
    success: bool
    nfev: int


def _safe(f: Callable[[float], float], x: float) -> float:
    try:
        v = float(f(x))
    except (OverflowError, ZeroDivisionError, ValueError):
        return math.inf
    if math.isnan(v):
        return math.inf
    return v


def theta_bounds(theta_max: float = math.inf, lo: float = THETA_LO,
                 hi: float = THETA_HI) -> tuple[float, float]:
    """Default theta search interval intersected with ``(0, theta_max)``."""
    if not theta_max > 0:
        raise ValueError("empty theta domain")
    if math.isfinite(theta_max):
        hi = min(hi, theta_max * (1.0 - OPEN_BOUND_RTOL))
        lo = min(lo, 0.5 * hi)
    return lo, hi


def golden_section(f, a: float, b: float, rtol: float = RTOL, log: bool = True,
                   maxiter: int = 200) -> tuple[float, float, int]:
    """Golden-section search for a minimum of ``f`` on ``[a, b]``.

    With ``log=True`` the search runs in ``ln x``.  Returns ``(x, f(x), nfev)``.
    """
    to = (lambda u: math.exp(u)) if log else (lambda u: u)
    lo, hi = (math.log(a), math.log(b)) if log else (a, b)
    c = hi - INVPHI * (hi - lo)
    d = lo + INVPHI * (hi - lo)
    fc, fd = _safe(f, to(c)), _safe(f, to(d))
    nfev = 2
    for _ in range(maxiter):
        width = hi - lo if log else (hi - lo) / max(abs(to(c)), 1e-300)
        if width <= rtol:
            break
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - INVPHI * (hi - lo)
            fc = _safe(f, to(c))
        else:
            lo, c, fc = c, d, fd
            d = lo + INVPHI * (hi - lo)
            fd = _safe(f, to(d))
        nfev += 1
    if fc <= fd:
        return to(c), fc, nfev
    return to(d), fd, nfev


def optimize_scalar(f: Callable[[float], float], lo: float, hi: float, *,
                    n_grid: int = N_GRID, rtol: float = RTOL, log: bool = True,
                    probe_upper: bool = False,
                    probe_max: float = math.inf) -> OptimizeResult:
    """Minimize ``f`` over ``[lo, hi]``.

    ``f`` may return ``inf`` (infeasible points).  If it is infinite at every
    grid point the result has ``success=False`` and ``fun=inf``.

    With ``probe_upper=True`` and the best grid point at ``hi``, the search
    keeps stepping upward by decades (up to ``hi * 1e9``) while ``f``
    decreases (never reaching ``probe_max``); this captures infima that are
    only reached in the limit of a large parameter, e.g. delay bounds that
    vanish as theta grows.
    """
    if not lo < hi:
        raise ValueError(f"empty search interval [{lo}, {hi}]")
    xs = np.geomspace(lo, hi, n_grid) if log else np.linspace(lo, hi, n_grid)
    fs = np.array([_safe(f, float(x)) for x in xs])
    nfev = n_grid
    if not np.any(np.isfinite(fs)):
        return OptimizeResult(math.nan, math.inf, False, nfev)
    i = int(np.argmin(fs))
    best_x, best_f = float(xs[i]), float(fs[i])

    if probe_upper and i == n_grid - 1:
        x = best_x
        for _ in range(9):
            x *= 10.0
            if x >= probe_max:
                break
            fx = _safe(f, x)
            nfev += 1
            if not fx < best_f:
                break
            best_x, best_f = x, fx
        if best_x > hi:
            return OptimizeResult(best_x, best_f, True, nfev)

    a = float(xs[max(i - 1, 0)])
    b = float(xs[min(i + 1, n_grid - 1)])
    x, fx, n = golden_section(f, a, b, rtol=rtol, log=log)
    nfev += n
    if fx < best_f:
        best_x, best_f = x, fx
    return OptimizeResult(best_x, best_f, True, nfev)
