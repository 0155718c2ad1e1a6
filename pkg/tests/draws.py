"""Shared random parameter draws for the oracle campaigns."""

from __future__ import annotations

from typing import List

import numpy as np

from eavesgame.core import ABOVE, BELOW, GameParams, alpha_tilde, p_prime

CAMPAIGN_SEED = 20240611
CAMPAIGN_EPSILON = 1e-6


def _base(rng: np.random.Generator, strong_primary: bool) -> dict:
    a = float(rng.uniform(0.2, 5.0))
    if strong_primary:
        b = float(rng.uniform(0.05, 1.0) * a)
    else:
        b = float(a * rng.uniform(1.05, 4.0))
    return dict(
        a=a,
        b=b,
        c=float(rng.uniform(0.1, 4.0)),
        gamma_bar=float(rng.uniform(0.05, 2.0)),
        beta=float(rng.uniform(0.05, 1.5)),
        p0_max=float(rng.uniform(0.5, 10.0)),
        p1_max=float(rng.uniform(0.5, 10.0)),
        epsilon=CAMPAIGN_EPSILON,
    )


def _aim_mixed(rng: np.random.Generator, kw: dict) -> dict:
    """Re-pick c so the threshold lands inside (0, P'(alpha_tilde))."""
    g = GameParams(**kw)
    at = alpha_tilde(g)
    if at in (ABOVE, BELOW):
        return kw
    target = float(rng.uniform(0.05, 0.95)) * p_prime(g, at)
    kw = dict(kw)
    kw["c"] = (g.a * target + 1.0) * (2.0 ** (2.0 * g.beta) - 1.0) / g.p1_max
    return kw


def campaign_draws(n_per_regime: int = 200, seed: int = CAMPAIGN_SEED) -> List[GameParams]:
    """``n_per_regime`` draws with a >= b followed by as many with a < b.

    A quarter of the a < b draws are steered towards the mixed equilibrium,
    which uniform draws hit only rarely.
    """
    rng = np.random.default_rng(seed)
    out = [GameParams(**_base(rng, True)) for _ in range(n_per_regime)]
    for k in range(n_per_regime):
        kw = _base(rng, False)
        if k % 4 == 0:
            # mixed play needs a PU that transmits for large alpha
            kw["gamma_bar"] = float(rng.uniform(0.05, 0.5))
            kw = _aim_mixed(rng, kw)
        out.append(GameParams(**kw))
    return out
