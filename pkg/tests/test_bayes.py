import math

import numpy as np
import pytest
from scipy import integrate

from eavesgame.bayes import (
    BeliefModel,
    bayes_sep,
    eavesdrop_term,
    expected_pu_utility,
    monte_carlo_compare,
    p_b,
)
from eavesgame.core import GameParams, capacity, p_star, pu_utility

FIG2 = GameParams(a=3.0, b=0.7, c=1.0, gamma_bar=1.0, beta=1.0, p0_max=10.0, p1_max=10.0)
HIDDEN = GameParams(a=3.0, b=1.0, c=0.7, gamma_bar=1.0, beta=1.0, p0_max=5.0, p1_max=5.0, epsilon=1e-2)


def test_belief_model():
    m = BeliefModel(0.7)
    total, _ = integrate.quad(m.pdf, 0, np.inf)
    assert total == pytest.approx(1.0)
    draws = m.sample(np.random.default_rng(0), 200_000)
    assert draws.mean() == pytest.approx(0.7, rel=0.01)
    with pytest.raises(ValueError):
        BeliefModel(0.0)


@pytest.mark.parametrize("b_bar,p0", [(0.1, 0.5), (0.7, 2.0), (3.0, 0.05), (5.0, 5.0)])
def test_eavesdrop_term_matches_quadrature(b_bar, p0):
    m = BeliefModel(b_bar)
    val, _ = integrate.quad(lambda b: capacity(b * p0) * m.pdf(b), 0, np.inf, epsabs=1e-13, limit=200)
    assert eavesdrop_term(m, p0, 0.0) == pytest.approx(val, rel=1e-9)
    assert eavesdrop_term(m, p0, 0.4) == pytest.approx(0.6 * val, rel=1e-9)


def test_expected_utility_full_alpha_is_deterministic():
    m = BeliefModel(0.7)
    for p in (0.1, 1.0, 4.0):
        assert expected_pu_utility(FIG2, m, p, 1.0) == pytest.approx(pu_utility(FIG2, p, 1.0), abs=1e-12)
    assert expected_pu_utility(FIG2, m, 0.0, 0.3) == 0.0


def test_reaction_curves_meet_at_one():
    m = BeliefModel(0.7)
    for al in np.linspace(0, 0.95, 20):
        assert p_b(FIG2, m, al) >= p_star(FIG2, al)
    assert p_b(FIG2, m, 1.0) == pytest.approx(p_star(FIG2, 1.0), abs=1e-6)


def test_bayes_sep_leader_value_bound():
    for b_bar in (0.05, 0.5, 2.0):
        out = bayes_sep(HIDDEN, BeliefModel(b_bar))
        assert out.utilities.u0 >= out.leader_value - HIDDEN.epsilon - 1e-12


def test_monte_carlo_deterministic_and_ordered():
    r1 = monte_carlo_compare(HIDDEN, [0.7, 1.3], [0.2, 2.0], 300, seed=5)
    r2 = monte_carlo_compare(HIDDEN, [0.7, 1.3], [0.2, 2.0], 300, seed=5)
    assert r1 == r2
    assert [(r.c, r.b_bar) for r in r1] == [(0.7, 0.2), (0.7, 2.0), (1.3, 0.2), (1.3, 2.0)]
    r3 = monte_carlo_compare(HIDDEN, [0.7, 1.3], [0.2, 2.0], 300, seed=5, workers=2)
    assert r3 == r1
    with pytest.raises(ValueError):
        monte_carlo_compare(HIDDEN, [0.7], [0.2], 0, seed=5)


def test_revealed_never_worse_for_pu():
    for r in monte_carlo_compare(HIDDEN, [0.7, 1.3], [0.1, 1.0, 5.0], 500, seed=1):
        assert r.avg_u0_revealed >= r.avg_u0_hidden - 1e-12
        assert math.isfinite(r.se_u0_diff)
