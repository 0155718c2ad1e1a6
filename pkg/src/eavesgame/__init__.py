"""Spectrum-sharing games between a primary user and eavesdropping secondary users."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
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
from .nash import NashOutcome, solve_nash, verify_equilibrium  # noqa: E402
from .stackelberg import dominance_check, ses_strategy, sep_strategy  # noqa: E402

__all__ = [
    "GameParams",
    "Strategy",
    "UtilityPair",
    "NashOutcome",
    "alpha_q",
    "alpha_tilde",
    "capacity",
    "dominance_check",
    "p_prime",
    "p_star",
    "pu_utility",
    "ses_strategy",
    "sep_strategy",
    "solve_nash",
    "su_utility",
    "threshold_q",
    "verify_equilibrium",
]
