"""Exponential integral E1(x) = int_x^inf exp(-t)/t dt for real x > 0."""

from __future__ import annotations

import math

EULER_GAMMA = 0.57721566490153286061
_EPS = 1e-17
_MAX_TERMS = 500
_SPLIT = 1.0


def _series(x: float) -> float:
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = 0.0
    term = 1.0
    for k in range(1, _MAX_TERMS):
        term *= -x / k
        contrib = term / k
        total += contrib
        if abs(contrib) < _EPS * abs(total):
            break
    return -EULER_GAMMA - math.log(x) - total


def _continued_fraction_scaled(x: float) -> float:
    # modified Lentz on E1(x) e^x = 1/(x+1- 1/(x+3- 4/(x+5- ...)))
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def _check(x: float) -> None:
    if not x > 0.0:
        raise ValueError(f"E1 is only defined here for x > 0, got {x!r}")


def exp_integral_e1(x: float) -> float:
    _check(x)
    if x <= _SPLIT:
        return _series(x)
    if x > 740.0:
        return 0.0
    return math.exp(-x) * _continued_fraction_scaled(x)


def exp_integral_e1_scaled(x: float) -> float:
    """``exp(x) * E1(x)``, finite for large x where E1 underflows."""
    _check(x)
    if x <= _SPLIT:
        return math.exp(x) * _series(x)
    return _continued_fraction_scaled(x)
