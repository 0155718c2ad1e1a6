"""Two-player game primitives: parameters, utilities and closed-form powers.

The PU picks a transmit power ``p0``; the SU picks the fraction ``alpha`` of
the slot it spends transmitting (the rest is spent eavesdropping on the PU).
All cost parameters are given as ``gamma_bar = gamma * ln 4``; utilities use
``gamma = gamma_bar / ln 4`` so that the stationarity conditions come out in
terms of ``gamma_bar``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Union

LN4 = math.log(4.0)

# alpha_tilde sentinels
BELOW = "below"
ABOVE = "above"

_BISECT_MAX_ITER = 200


@dataclass(frozen=True)
class GameParams:
    """Channel gains and cost constants of the PU/SU game."""

    a: float
    b: float
    c: float
    gamma_bar: float
    beta: float
    p0_max: float
    p1_max: float
    epsilon: float = 1e-3

    def __post_init__(self):
        for name in ("a", "b", "c", "gamma_bar", "beta", "p0_max", "p1_max", "epsilon"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        if self.epsilon >= self.p0_max:
            raise ValueError("epsilon must be smaller than p0_max")

    @property
    def gamma(self) -> float:
        return self.gamma_bar / LN4

    def with_(self, **changes) -> "GameParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class Strategy:
    p0: float
    alpha: float


@dataclass(frozen=True)
class UtilityPair:
    u0: float
    u1: float


def capacity(x: float) -> float:
    """Gaussian channel capacity ``0.5 * log2(1 + x)`` in bits per channel use."""
    if x < 0:
        raise ValueError(f"capacity is undefined for negative SNR {x!r}")
    return 0.5 * math.log2(1.0 + x)


def pu_utility(params: GameParams, p0: float, alpha: float) -> float:
    return (
        capacity(params.a * p0)
        - (1.0 - alpha) * capacity(params.b * p0)
        - params.gamma * p0
    )


def pu_utility_secrecy(params: GameParams, p0: float, alpha: float) -> float:
    """PU utility with the secrecy rate clipped at zero."""
    rate = capacity(params.a * p0) - (1.0 - alpha) * capacity(params.b * p0)
    return max(rate, 0.0) - params.gamma * p0


def su_rate_margin(params: GameParams, p0: float) -> float:
    """Per-unit-time SU payoff ``C(c P1 / (1 + a p0)) - beta``."""
    return capacity(params.c * params.p1_max / (1.0 + params.a * p0)) - params.beta


def su_utility(params: GameParams, p0: float, alpha: float) -> float:
    return alpha * su_rate_margin(params, p0)


def threshold_q(params: GameParams) -> float:
    """PU power below which the SU gains by transmitting. May be negative."""
    denom = 2.0 ** (2.0 * params.beta) - 1.0
    if denom == 0.0:
        raise ValueError("threshold undefined for beta == 0")
    return (params.c * params.p1_max / denom - 1.0) / params.a


def p_hat(params: GameParams, alpha: float) -> float:
    """Inflection point of ``pu_utility`` in p0: concave to its right, convex to its left."""
    a, b = params.a, params.b
    s = math.sqrt(1.0 - alpha)
    den = a * b * (1.0 - s)
    num = b * s - a
    if den == 0.0:
        return math.inf if num > 0 else -math.inf
    return num / den


def _quadratic_terms(params: GameParams, alpha: float):
    a, b, g = params.a, params.b, params.gamma_bar
    x = alpha * a * b - g * (a + b)
    y = 4.0 * g * a * b * (g - a + b * (1.0 - alpha))
    return x, y


def p_prime_unclamped(params: GameParams, alpha: float) -> Optional[float]:
    """Larger root of the first-order condition, or None if it has no real root."""
    x, y = _quadratic_terms(params, alpha)
    disc = x * x - y
    if disc < 0.0:
        # a >= b guarantees a real root; absorb rounding at a == b
        if disc > -1e-12 * (x * x + abs(y)):
            disc = 0.0
        else:
            return None
    return (x + math.sqrt(disc)) / (2.0 * params.gamma_bar * params.a * params.b)


def p_prime(params: GameParams, alpha: float) -> Optional[float]:
    """Stationary (local-max) PU power for a given alpha, clamped to [0, p0_max]."""
    root = p_prime_unclamped(params, alpha)
    if root is None:
        return None
    return min(max(root, 0.0), params.p0_max)


def p_star(params: GameParams, alpha: float) -> float:
    """PU best response: the better of silence and the stationary power (ties go to 0)."""
    cand = p_prime(params, alpha)
    if cand is None:
        # utility is decreasing in p0; compare the box endpoints
        cand = params.p0_max
    if pu_utility(params, cand, alpha) > pu_utility(params, 0.0, alpha):
        return cand
    return 0.0


def p_star_full_alpha(params: GameParams) -> float:
    """Best PU power when the SU never eavesdrops."""
    return min(params.p0_max, max(0.0, 1.0 / params.gamma_bar - 1.0 / params.a))


def alpha_q_unchecked(params: GameParams, q: float) -> float:
    """Closed-form alpha at which ``q`` is a stationary point of ``pu_utility``."""
    a, b, g = params.a, params.b, params.gamma_bar
    return (g * (q * (a + b + a * b * q) + 1.0) - a + b) / (b * (a * q + 1.0))


def alpha_q(params: GameParams, tol: float = 1e-12) -> Optional[float]:
    """SU time fraction that makes the PU's stationary power equal the threshold."""
    value = alpha_q_unchecked(params, threshold_q(params))
    if -tol <= value <= 1.0 + tol:
        return min(max(value, 0.0), 1.0)
    return None


def pu_peak_utility(params: GameParams, alpha: float) -> float:
    """``pu_utility`` at the stationary power; negative when no stationary point exists.

    Nondecreasing in alpha, which is what the bisection in :func:`alpha_tilde` needs.
    """
    p = p_prime(params, alpha)
    if p is None:
        return -math.inf
    return pu_utility(params, p, alpha)


AlphaTilde = Union[float, str]


def alpha_tilde(params: GameParams) -> AlphaTilde:
    """Largest alpha at which the PU still prefers silence.

    Returns ``BELOW`` when the PU transmits for every alpha (the stationary
    utility is already positive at alpha=0) and ``ABOVE`` when it never does.
    """
    h = lambda al: pu_peak_utility(params, al)  # noqa: E731
    if h(0.0) > 0.0:
        return BELOW
    if not h(1.0) > 0.0:
        return ABOVE
    lo, hi = 0.0, 1.0
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if h(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    # hi sits on the transmitting side, where P'(alpha) > 0
    return hi


def alpha_tilde_value(params: GameParams) -> float:
    """``alpha_tilde`` mapped onto [0, 1] (``BELOW`` -> 0, ``ABOVE`` -> 1)."""
    at = alpha_tilde(params)
    if at == BELOW:
        return 0.0
    if at == ABOVE:
        return 1.0
    return at
