"""Bounded scalar maximization: coarse grid scan, then golden-section refinement."""

from __future__ import annotations

import math
from typing import Callable, Tuple

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-8, max_iter: int = 200
) -> Tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[lo, hi]``. Returns ``(x, f(x))``."""
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = f(x1)
    x = 0.5 * (lo + hi)
    return x, f(x)


def grid_golden_max(
    f: Callable[[float], float], lo: float, hi: float, n_grid: int = 1000, tol: float = 1e-8
) -> Tuple[float, float]:
    """Global-ish maximum of ``f`` on ``[lo, hi]``.

    An ``n_grid`` point scan picks the best bracket, which golden-section search
    then refines. The scan guards against several local maxima; the refined
    point is only accepted if it beats the best grid point. Ties keep the
    smaller abscissa.
    """
    if hi <= lo:
        return lo, f(lo)
    step = (hi - lo) / (n_grid - 1)
    best_i, best_v = 0, f(lo)
    for i in range(1, n_grid):
        v = f(lo + i * step)
        if v > best_v:
            best_i, best_v = i, v
    best_x = lo + best_i * step
    a = lo + max(best_i - 1, 0) * step
    b = min(lo + (best_i + 1) * step, hi)
    x, v = golden_section_max(f, a, b, tol=tol)
    if v > best_v:
        return x, v
    return best_x, best_v
