"""Best responses and Nash equilibria of the simultaneous-move PU/SU game."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple, Union

import numpy as np

from .core import (
    ABOVE,
    BELOW,
    GameParams,
    Strategy,
    UtilityPair,
    alpha_q,
    alpha_tilde,
    capacity,
    p_prime,
    p_star,
    pu_utility,
    su_utility,
    threshold_q,
)

CASES = (
    "T1-low-Q",
    "T1-mid-Q",
    "T1-high-Q",
    "T2-negQ",
    "T2-zeroQ",
    "T2-mixed",
    "T2-mid-Q",
    "T2-high-Q",
)


class InfeasibleMixedError(ValueError):
    """The PU indifference system has no interior solution."""


@dataclass(frozen=True)
class ReactionSet:
    """Best-response correspondence value.

    ``kind`` is ``point``, ``interval`` (``values`` holds the endpoints),
    ``two-point`` or ``curve`` (``curve`` maps alpha to power).
    """

    kind: str
    values: Tuple[float, ...] = ()
    curve: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.kind == "interval" and self.values[0] > self.values[1]:
            raise ValueError("interval endpoints out of order")
        if self.kind == "two-point" and self.values[0] == self.values[1]:
            raise ValueError("two-point reaction set needs distinct members")

    def contains(self, x: float, tol: float = 1e-12) -> bool:
        if self.kind == "interval":
            return self.values[0] - tol <= x <= self.values[1] + tol
        if self.kind == "curve":
            raise TypeError("membership is not defined for a curve")
        return any(abs(x - v) <= tol for v in self.values)


@dataclass(frozen=True)
class MixedStrategy:
    """PU distribution over powers plus the SU's expected transmit fraction.

    Only the mean of the SU's mixture matters for both players' expected
    utilities (they are linear in alpha), so the SU side is kept as its
    expected value together with the declared support family.
    """

    pu_support: Tuple[Tuple[float, float], ...]
    su_expected_alpha: float
    su_support: str = "point"

    def __post_init__(self):
        probs = [p for _, p in self.pu_support]
        if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError(f"PU probabilities must be nonnegative and sum to 1: {probs}")
        lo, hi = _support_hull(self.su_support, self.su_expected_alpha)
        if not lo - 1e-12 <= self.su_expected_alpha <= hi + 1e-12:
            raise ValueError("SU expected alpha lies outside its declared support")


def _support_hull(kind: str, mean: float) -> Tuple[float, float]:
    if kind == "point":
        return mean, mean
    if kind.startswith("[0,") and kind.endswith("]"):
        upper = kind[3:-1]
        return 0.0, 1.0 if upper == "1" else float(upper)
    raise ValueError(f"unknown SU support family {kind!r}")


Profile = Union[Strategy, MixedStrategy]


@dataclass(frozen=True)
class NashOutcome:
    case: str
    strategy: Profile
    utilities: UtilityPair
    alpha_tilde: Optional[float] = None

    @property
    def is_mixed(self) -> bool:
        return isinstance(self.strategy, MixedStrategy)

    @property
    def pu_support(self) -> Tuple[Tuple[float, float], ...]:
        if isinstance(self.strategy, Strategy):
            return ((self.strategy.p0, 1.0),)
        return self.strategy.pu_support

    @property
    def su_alpha(self) -> float:
        if isinstance(self.strategy, Strategy):
            return self.strategy.alpha
        return self.strategy.su_expected_alpha

    @property
    def pu_power(self) -> float:
        """Expected PU power."""
        return sum(p * w for p, w in self.pu_support)


def su_best_response(params: GameParams, p0: float) -> ReactionSet:
    q = threshold_q(params)
    if p0 < q:
        return ReactionSet("point", (1.0,))
    if p0 > q:
        return ReactionSet("point", (0.0,))
    return ReactionSet("interval", (0.0, 1.0))


def pu_best_response(params: GameParams, alpha: float) -> ReactionSet:
    if params.a >= params.b:
        return ReactionSet("point", (p_prime(params, alpha),))
    at = alpha_tilde(params)
    if at == ABOVE:
        return ReactionSet("point", (0.0,))
    if at == BELOW or alpha > at:
        return ReactionSet("point", (p_star(params, alpha),))
    if alpha < at:
        return ReactionSet("point", (0.0,))
    pt = p_prime(params, at)
    if pt is None or pt == 0.0:
        return ReactionSet("point", (0.0,))
    return ReactionSet("two-point", (0.0, pt))


def pu_reaction_curve(params: GameParams) -> ReactionSet:
    """The a >= b reaction set as a curve alpha -> P'(alpha)."""
    return ReactionSet("curve", curve=lambda al: p_prime(params, al))


def mixed_pu_probs(params: GameParams, p_tilde: Optional[float] = None) -> Tuple[float, float]:
    """PU mixing weights on ``{0, P'(alpha_tilde)}`` that leave the SU indifferent."""
    if p_tilde is None:
        at = alpha_tilde(params)
        if isinstance(at, str):
            raise InfeasibleMixedError(f"alpha_tilde is {at}; no mixed equilibrium")
        p_tilde = p_prime(params, at)
    k = params.c * params.p1_max
    c_high = capacity(k)
    c_low = capacity(k / (1.0 + params.a * p_tilde))
    if not c_low < params.beta < c_high:
        raise InfeasibleMixedError(
            f"beta={params.beta} outside ({c_low}, {c_high}); the mixed case does not apply"
        )
    p = (params.beta - c_low) / (c_high - c_low)
    return p, 1.0 - p


def _pure(case, params, p0, alpha, at=None) -> NashOutcome:
    util = UtilityPair(pu_utility(params, p0, alpha), su_utility(params, p0, alpha))
    return NashOutcome(case, Strategy(p0, alpha), util, at)


def _expected(params, support, alpha) -> UtilityPair:
    u0 = sum(w * pu_utility(params, p, alpha) for p, w in support)
    u1 = sum(w * su_utility(params, p, alpha) for p, w in support)
    return UtilityPair(u0, u1)


def _mixed(case, params, support, alpha, family, at) -> NashOutcome:
    ms = MixedStrategy(tuple(support), alpha, family)
    return NashOutcome(case, ms, _expected(params, support, alpha), at)


def _alpha_for_q(params: GameParams, q: float, lo: float = 0.0) -> float:
    """alpha in [lo, 1] with P'(alpha) == q; closed form with a bisection fallback."""
    aq = alpha_q(params)
    if aq is not None and aq >= lo - 1e-12:
        return max(aq, lo)
    a_lo, a_hi = lo, 1.0
    for _ in range(200):
        mid = 0.5 * (a_lo + a_hi)
        pm = p_prime(params, mid)
        if pm is not None and pm >= q:
            a_hi = mid
        else:
            a_lo = mid
    return a_hi


def solve_nash(params: GameParams) -> NashOutcome:
    """Nash equilibrium of the simultaneous game, tagged by the case that applies."""
    q = threshold_q(params)
    if params.a >= params.b:
        p0 = p_prime(params, 0.0)
        p1 = p_prime(params, 1.0)
        if q < p0:
            return _pure("T1-low-Q", params, p0, 0.0)
        if q > p1:
            return _pure("T1-high-Q", params, p1, 1.0)
        return _pure("T1-mid-Q", params, q, _alpha_for_q(params, q))

    at = alpha_tilde(params)
    if at == BELOW:
        # u0(P, 0) < 0 for every P > 0 when a < b
        raise AssertionError("alpha_tilde below 0 is impossible when a < b")
    if q < 0.0:
        return _pure("T2-negQ", params, 0.0, 0.0)
    if at == ABOVE:
        # the PU never transmits; alpha_tilde is effectively 1
        if q == 0.0:
            return _mixed("T2-zeroQ", params, [(0.0, 1.0)], 0.5, "[0,1]", None)
        return _pure("T2-high-Q", params, 0.0, 1.0)
    if q == 0.0:
        return _mixed("T2-zeroQ", params, [(0.0, 1.0)], 0.5 * at, f"[0,{at!r}]", at)
    p_t = p_prime(params, at)
    p1 = p_star(params, 1.0)
    if q < p_t:
        w0, w1 = mixed_pu_probs(params, p_t)
        return _mixed("T2-mixed", params, [(0.0, w0), (p_t, w1)], at, "[0,1]", at)
    if q > p1:
        return _pure("T2-high-Q", params, p1, 1.0, at)
    aq = _alpha_for_q(params, q, lo=at)
    return _mixed("T2-mid-Q", params, [(q, 1.0)], aq, "[0,1]", at)


# ---------------------------------------------------------------------------
# brute-force verification


@dataclass
class VerificationReport:
    passed: bool
    pu_gain: float
    su_gain: float
    indifference_gap: float
    tolerance: float
    notes: list = field(default_factory=list)

    @property
    def worst_deviation(self) -> float:
        return max(self.pu_gain, self.su_gain, self.indifference_gap)


def _c_vec(x):
    return 0.5 * np.log2(1.0 + x)


def pu_utility_grid(params: GameParams, p0: np.ndarray, alpha: float) -> np.ndarray:
    return _c_vec(params.a * p0) - (1.0 - alpha) * _c_vec(params.b * p0) - params.gamma * p0


def verify_equilibrium(
    params: GameParams, outcome: NashOutcome, grid_n: int = 100_000
) -> VerificationReport:
    """Check that no unilateral deviation on a grid beats the outcome.

    Deviations are scored against the opponent's (expected) strategy. For a
    mixed PU strategy every support point must also be a best response.
    """
    if grid_n < 1000:
        raise ValueError("grid_n must be at least 1000")
    support = outcome.pu_support
    alpha = outcome.su_alpha
    slope = params.a + params.b + params.c * params.p1_max
    tol = 1e-6 + slope * max(params.p0_max, 1.0) / (grid_n - 1)

    p_grid = np.linspace(0.0, params.p0_max, grid_n)
    u0_grid = pu_utility_grid(params, p_grid, alpha)
    support_vals = [pu_utility(params, p, alpha) for p, _ in support]
    u0_eq = sum(w * v for (_, w), v in zip(support, support_vals))
    best_dev = max(float(u0_grid.max()), max(support_vals))
    pu_gain = max(best_dev - u0_eq, 0.0)

    # SU payoff is linear in alpha with slope E_f[margin]
    margin = sum(
        w * (capacity(params.c * params.p1_max / (1.0 + params.a * p)) - params.beta)
        for p, w in support
    )
    a_grid = np.linspace(0.0, 1.0, grid_n)
    u1_eq = alpha * margin
    su_gain = max(float((a_grid * margin).max()) - u1_eq, 0.0)

    notes = []
    gap = 0.0
    if len(support) > 1:
        gap = max(abs(v - best_dev) for v in support_vals)
        notes.append("PU support indifference checked")
    family = getattr(outcome.strategy, "su_support", "point")
    if family != "point":
        gap = max(gap, abs(margin))
        notes.append("SU support indifference checked")

    passed = pu_gain <= tol and su_gain <= tol and gap <= tol
    return VerificationReport(passed, pu_gain, su_gain, gap, tol, notes)


def perturb(outcome: NashOutcome, params: GameParams, dp0: float) -> NashOutcome:
    """Shift every PU support point by ``dp0`` (clamped); used to exercise the oracle."""
    support = tuple((min(max(p + dp0, 0.0), params.p0_max), w) for p, w in outcome.pu_support)
    alpha = outcome.su_alpha
    if isinstance(outcome.strategy, Strategy):
        strat: Profile = Strategy(support[0][0], alpha)
    else:
        strat = MixedStrategy(support, alpha, outcome.strategy.su_support)
    return NashOutcome(outcome.case, strat, _expected(params, support, alpha), outcome.alpha_tilde)
