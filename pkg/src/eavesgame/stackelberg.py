"""Leader-follower equilibria: PU-led (SEP) and SU-led (SES)."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Union

from .core import (
    ABOVE,
    LN4,
    GameParams,
    UtilityPair,
    alpha_tilde,
    capacity,
    p_prime,
    p_star,
    pu_utility,
    su_utility,
    threshold_q,
)
from .nash import NashOutcome
from .optimize import grid_golden_max

DOMINANCE_SLACK = 1e-9


@dataclass(frozen=True)
class StackelbergOutcome:
    leader: str  # "PU" or "SU"
    leader_strategy: float
    follower_strategy: float
    utilities: UtilityPair
    leader_value: Optional[float]
    epsilon_used: float
    case: str = ""

    @property
    def p0(self) -> float:
        return self.leader_strategy if self.leader == "PU" else self.follower_strategy

    @property
    def alpha(self) -> float:
        return self.follower_strategy if self.leader == "PU" else self.leader_strategy


@dataclass(frozen=True)
class DominanceReport:
    se_utilities: UtilityPair
    ne_utilities: UtilityPair
    dominates: bool
    margin_u0: float
    margin_u1: float

    @property
    def strict(self) -> bool:
        """Weak dominance with at least one player strictly better off."""
        return self.dominates and max(self.margin_u0, self.margin_u1) > DOMINANCE_SLACK


def follower_alpha(q: float, p0: float) -> float:
    """SU reply to an announced power; at ``p0 == q`` the leader assumes the worst (0)."""
    return 1.0 if p0 < q else 0.0


def backoff_step(a: float, gamma_bar: float, epsilon: float, q: float) -> float:
    """How far below ``q`` the leader announces its power.

    Normally ``epsilon``. When the full-transmission utility is steeper than
    one unit per unit power just below ``q``, the step is shrunk so that the
    utility lost stays within ``epsilon``.
    """
    p = max(q - epsilon, 0.0)
    slope = (a / (1.0 + a * p) - gamma_bar) / LN4
    if slope > 1.0:
        return epsilon / slope
    return epsilon


def backoff(params: GameParams, q: float) -> float:
    return backoff_step(params.a, params.gamma_bar, params.epsilon, q)


def _backed_off(params: GameParams, q: float) -> float:
    p = q - backoff(params, q)
    if p < 0.0:
        warnings.warn(
            f"threshold {q:.3g} is within epsilon of zero; announcing zero power",
            RuntimeWarning,
            stacklevel=3,
        )
        return 0.0
    return p


def leader_value(params: GameParams) -> float:
    """Supremum of the PU's worst-case utility when it leads."""
    q = threshold_q(params)
    p1 = p_prime(params, 1.0)
    if params.a >= params.b:
        p0 = p_prime(params, 0.0)
        if q <= 0.0:
            return pu_utility(params, p0, 0.0)
        if q < p0:
            return max(pu_utility(params, q, 1.0), pu_utility(params, p0, 0.0))
        if q <= p1:
            return pu_utility(params, q, 1.0)
        return pu_utility(params, p1, 1.0)
    # a < b: transmitting against an eavesdropper never pays
    if q <= 0.0:
        return 0.0
    if q <= p1:
        return pu_utility(params, q, 1.0)
    return pu_utility(params, p1, 1.0)


def _pu_led(params, case, p0, q, value) -> StackelbergOutcome:
    alpha = follower_alpha(q, p0)
    util = UtilityPair(pu_utility(params, p0, alpha), su_utility(params, p0, alpha))
    return StackelbergOutcome("PU", p0, alpha, util, value, params.epsilon, case)


def sep_strategy(params: GameParams) -> StackelbergOutcome:
    """epsilon-Stackelberg equilibrium with the PU leading."""
    q = threshold_q(params)
    value = leader_value(params)
    p1 = p_prime(params, 1.0)
    if params.a >= params.b:
        p0 = p_prime(params, 0.0)
        if q <= 0.0:
            out = _pu_led(params, "SEP-negQ", p0, q, value)
        elif q < p0:
            low = _backed_off(params, q)
            u_low = pu_utility(params, low, follower_alpha(q, low))
            u_p0 = pu_utility(params, p0, follower_alpha(q, p0))
            choice = low if u_low >= u_p0 else p0
            out = _pu_led(params, "SEP-low-Q", choice, q, value)
        elif q <= p1:
            out = _pu_led(params, "SEP-mid-Q", _backed_off(params, q), q, value)
        else:
            out = _pu_led(params, "SEP-high-Q", p1, q, value)
    else:
        if q <= 0.0:
            out = _pu_led(params, "SEP-negQ", 0.0, q, value)
        elif q <= p1:
            out = _pu_led(params, "SEP-mid-Q", _backed_off(params, q), q, value)
        else:
            out = _pu_led(params, "SEP-high-Q", p1, q, value)
    if out.utilities.u0 < value - params.epsilon - 1e-12:
        warnings.warn(
            f"SEP utility {out.utilities.u0} misses the leader value {value} by more than epsilon",
            RuntimeWarning,
            stacklevel=2,
        )
    return out


def predicted_outcome(params: GameParams) -> StackelbergOutcome:
    """The play both users settle on: the PU leads."""
    return sep_strategy(params)


def _su_objective(params: GameParams, alpha: float) -> float:
    p = p_prime(params, alpha)
    return alpha * (capacity(params.c * params.p1_max / (1.0 + params.a * p)) - params.beta)


def ses_strategy(params: GameParams, n_grid: int = 1000) -> StackelbergOutcome:
    """Stackelberg equilibrium with the SU leading and the PU best-responding.

    With ``a < b`` the PU stays silent for alpha below ``alpha_tilde``; the SU
    compares creeping up to ``alpha_tilde - epsilon`` against the best alpha in
    the region where the PU transmits.
    """
    if params.a >= params.b:
        alpha, u1 = grid_golden_max(lambda al: _su_objective(params, al), 0.0, 1.0, n_grid)
        if u1 <= 0.0:
            alpha = 0.0
        p0 = p_prime(params, alpha)
        util = UtilityPair(pu_utility(params, p0, alpha), su_utility(params, p0, alpha))
        return StackelbergOutcome("SU", alpha, p0, util, None, params.epsilon, "SES-concave")

    at = alpha_tilde(params)
    silent_margin = capacity(params.c * params.p1_max) - params.beta
    if at == ABOVE:
        alpha = 1.0 if silent_margin > 0.0 else 0.0
        util = UtilityPair(0.0, alpha * silent_margin)
        return StackelbergOutcome("SU", alpha, 0.0, util, None, params.epsilon, "SES-silent")

    left_alpha = max(at - params.epsilon, 0.0) if silent_margin > 0.0 else 0.0
    left_u1 = left_alpha * silent_margin

    def right(al: float) -> float:
        return al * (capacity(params.c * params.p1_max / (1.0 + params.a * p_star(params, al))) - params.beta)

    r_alpha, r_u1 = grid_golden_max(right, at, 1.0, n_grid)
    if r_u1 > left_u1:
        p0 = p_star(params, r_alpha)
        util = UtilityPair(pu_utility(params, p0, r_alpha), su_utility(params, p0, r_alpha))
        return StackelbergOutcome("SU", r_alpha, p0, util, None, params.epsilon, "SES-transmit")
    util = UtilityPair(pu_utility(params, 0.0, left_alpha), left_u1)
    return StackelbergOutcome("SU", left_alpha, 0.0, util, None, params.epsilon, "SES-silent")


def dominance_check(
    params: GameParams, se: StackelbergOutcome, ne: Union[NashOutcome, StackelbergOutcome]
) -> DominanceReport:
    m0 = se.utilities.u0 - ne.utilities.u0
    m1 = se.utilities.u1 - ne.utilities.u1
    dominates = m0 >= -DOMINANCE_SLACK and m1 >= -DOMINANCE_SLACK
    return DominanceReport(se.utilities, ne.utilities, dominates, m0, m1)
