"""Hidden eavesdropper channel: the PU only knows the mean of an exponential ``b``."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .core import GameParams, UtilityPair, capacity, p_star_full_alpha, pu_utility, su_utility, threshold_q
from .optimize import grid_golden_max
from .special import exp_integral_e1_scaled
from .stackelberg import StackelbergOutcome, _backed_off, follower_alpha, sep_strategy

LN2 = math.log(2.0)


@dataclass(frozen=True)
class BeliefModel:
    """Exponential belief over the eavesdropper power gain (Rayleigh fading)."""

    b_bar: float

    def __post_init__(self):
        if not self.b_bar > 0:
            raise ValueError("b_bar must be positive")

    def pdf(self, b):
        return np.exp(-np.asarray(b) / self.b_bar) / self.b_bar

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.b_bar * rng.standard_exponential(n)


@dataclass(frozen=True)
class ComparisonRecord:
    b_bar: float
    c: float
    avg_u0_revealed: float
    avg_u0_hidden: float
    avg_u1_revealed: float
    avg_u1_hidden: float
    n_samples: int
    seed: int
    se_u0_diff: float = 0.0
    se_u1_diff: float = 0.0
    hidden_p0: float = 0.0
    hidden_alpha: float = 0.0


def eavesdrop_term(belief: BeliefModel, p0: float, alpha: float) -> float:
    """Expected eavesdropped rate ``(1 - alpha) E_b[C(b p0)]``."""
    if p0 <= 0.0:
        return 0.0
    x = 1.0 / (belief.b_bar * p0)
    return (1.0 - alpha) / (2.0 * LN2) * exp_integral_e1_scaled(x)


def expected_pu_utility(params: GameParams, belief: BeliefModel, p0: float, alpha: float) -> float:
    """PU utility averaged over the belief on ``b``; ``params.b`` is not used."""
    if p0 <= 0.0:
        return 0.0
    return capacity(params.a * p0) - eavesdrop_term(belief, p0, alpha) - params.gamma * p0


def p_b(params: GameParams, belief: BeliefModel, alpha: float, n_grid: int = 1000) -> float:
    """Power maximizing the expected PU utility at a given alpha (ties go to 0)."""
    if alpha >= 1.0:
        return p_star_full_alpha(params)
    x, v = grid_golden_max(
        lambda p: expected_pu_utility(params, belief, p, alpha), 0.0, params.p0_max, n_grid
    )
    return x if v > 0.0 else 0.0


def bayes_sep(params: GameParams, belief: BeliefModel) -> StackelbergOutcome:
    """PU-led equilibrium when the PU plans against the belief instead of the true ``b``.

    Mirrors the revealed-b case table with ``P'`` replaced by ``p_b`` and the
    PU utility by its expectation. The threshold does not depend on ``b``.
    """
    q = threshold_q(params)
    pb0 = p_b(params, belief, 0.0)
    pb1 = p_b(params, belief, 1.0)

    def value(p):
        return expected_pu_utility(params, belief, p, follower_alpha(q, p))

    if q <= 0.0:
        case, p = "BSEP-negQ", pb0
    elif q < pb0:
        low = _backed_off(params, q)
        case = "BSEP-low-Q"
        p = low if value(low) >= value(pb0) else pb0
    elif q <= pb1:
        case, p = "BSEP-mid-Q", _backed_off(params, q)
    else:
        case, p = "BSEP-high-Q", pb1
    alpha = follower_alpha(q, p)
    util = UtilityPair(value(p), su_utility(params, p, alpha))
    if q <= 0.0:
        lead = value(pb0)
    elif q < pb0:
        lead = max(expected_pu_utility(params, belief, q, 1.0), value(pb0))
    elif q <= pb1:
        lead = expected_pu_utility(params, belief, q, 1.0)
    else:
        lead = value(pb1)
    return StackelbergOutcome("PU", p, alpha, util, lead, params.epsilon, case)


def _sweep_point(args) -> ComparisonRecord:
    params, b_bar, c, unit_draws, seed = args
    game = params.with_(c=c)
    belief = BeliefModel(b_bar)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        hidden = bayes_sep(game, belief)
        bs = np.maximum(b_bar * unit_draws, 1e-300)
        n = len(bs)
        u0_rev = np.empty(n)
        u1_rev = np.empty(n)
        u0_hid = np.empty(n)
        for k, b in enumerate(bs):
            g = game.with_(b=float(b))
            out = sep_strategy(g)
            u0_rev[k] = out.utilities.u0
            u1_rev[k] = out.utilities.u1
            u0_hid[k] = pu_utility(g, hidden.p0, hidden.alpha)
    # the SU knows b, but its reply depends only on the threshold
    u1_hid = np.full(n, su_utility(game, hidden.p0, hidden.alpha))
    d0 = u0_rev - u0_hid
    d1 = u1_hid - u1_rev
    se = lambda d: float(d.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0  # noqa: E731
    return ComparisonRecord(
        b_bar=b_bar,
        c=c,
        avg_u0_revealed=float(u0_rev.mean()),
        avg_u0_hidden=float(u0_hid.mean()),
        avg_u1_revealed=float(u1_rev.mean()),
        avg_u1_hidden=float(u1_hid.mean()),
        n_samples=n,
        seed=seed,
        se_u0_diff=se(d0),
        se_u1_diff=se(d1),
        hidden_p0=hidden.p0,
        hidden_alpha=hidden.alpha,
    )


def monte_carlo_compare(
    params: GameParams,
    c_values: Sequence[float],
    b_bar_values: Sequence[float],
    n_samples: int,
    seed: int,
    workers: int = 1,
) -> List[ComparisonRecord]:
    """Average utilities with ``b`` revealed to the PU versus hidden behind its mean.

    One stream of unit-mean exponential draws is taken from ``seed`` and scaled
    by each ``b_bar``, so every sweep point sees the same underlying fading
    realizations and results do not depend on scheduling. Records come back
    ordered by ``c`` then ``b_bar``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if any(v <= 0 for v in list(c_values) + list(b_bar_values)):
        raise ValueError("sweep values must be positive")
    unit = np.random.default_rng(seed).standard_exponential(n_samples)
    jobs = [(params, float(bb), float(c), unit, seed) for c in c_values for bb in b_bar_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]
