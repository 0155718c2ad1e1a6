import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eavesgame.core import GameParams, pu_utility, su_utility, threshold_q
from eavesgame.multi import (
    MultiGame,
    SuProfile,
    brute_force_order,
    cascade_segments,
    descending_b_order,
    dominating_su,
    followers_cascade,
    grant_algorithm,
    is_uniform,
    leader_best_power,
    nash_equilibria_multi,
    optimal_order_uniform,
    order_values,
    pu_utility_multi,
    simultaneous_equilibrium,
    su_utility_multi,
    threshold_qi,
)
from eavesgame.stackelberg import sep_strategy


def uniform_game(beta=0.1, n=20, b=None):
    b = b if b is not None else np.linspace(2.0, 0.1, n)
    sus = [SuProfile(f"s{i + 1}", float(bi), 0.5, 4.5, beta) for i, bi in enumerate(b)]
    return MultiGame(2.0, 0.2, 4.5, sus)


def test_game_validation():
    s = SuProfile("x", 1, 1, 1, 1)
    with pytest.raises(ValueError):
        MultiGame(1, 1, 1, [s, s])
    with pytest.raises(ValueError):
        MultiGame(1, 1, 1, [s], ("y",))
    with pytest.raises(ValueError):
        SuProfile("z", 0, 1, 1, 1)


def test_pu_utility_all_transmitting():
    g = uniform_game()
    ones = (1.0,) * g.n
    assert pu_utility_multi(g, 4.5, ones) == pytest.approx(1.01, abs=0.01)
    assert dominating_su(g, 4.5, ones) is None
    alphas = (0.0,) + ones[1:]
    assert dominating_su(g, 1.0, alphas) == 0


def test_su_utility_rank4():
    g = uniform_game()
    alphas = (1.0,) * g.n
    k = 0.5 * 4.5
    expected = 0.5 * np.log2(1 + k / (1 + 2.0 * 4.5 + 3 * k)) - 0.1
    assert su_utility_multi(g, 3, 4.5, alphas) == pytest.approx(expected, abs=1e-15)
    # rank 4 is worse off than silence, consistent with Q_4 < 4.5
    assert expected < 0 and threshold_qi(g, 3, alphas) < 4.5
    assert su_utility_multi(g, 3, 4.5, alphas[:3] + (0.0,) + alphas[4:]) == 0.0


def test_uniform_threshold_closed_form():
    g = uniform_game()
    ones = (1.0,) * g.n
    k1, k2 = 2.25, 0.1
    for r in range(g.n):
        closed = (k1 / (2 ** (2 * k2) - 1) - 1 - r * k1) / 2.0
        assert threshold_qi(g, r, ones) == pytest.approx(closed, abs=1e-12)


def test_threshold_monotone_in_interference():
    g = uniform_game(n=4)
    base = threshold_qi(g, 3, (0.0, 0.0, 0.0, 1.0))
    more = threshold_qi(g, 3, (1.0, 0.0, 0.0, 1.0))
    assert more < base


def test_cascade_examples():
    g = uniform_game()
    assert followers_cascade(g, 4.5) == (1.0,) * 3 + (0.0,) * 17
    assert followers_cascade(g, 100.0) == (0.0,) * 20
    small = uniform_game(beta=0.1, n=3)
    assert followers_cascade(small, 0.0) == (1.0, 1.0, 1.0)
    # exactly at a threshold the SU eavesdrops
    q1 = threshold_qi(small, 0, (0, 0, 0))
    assert followers_cascade(small, q1)[0] == 0.0


def test_segments_cover_interval():
    g = uniform_game(n=6)
    segs = cascade_segments(g)
    assert segs[0][0] == 0.0 and segs[-1][1] == g.p0_max
    assert all(s[1] == t[0] for s, t in zip(segs, segs[1:]))


def test_optimal_order_uniform():
    sus = [SuProfile("weak", 0.4, 0.5, 2.0, 0.2), SuProfile("strong", 0.7, 0.5, 2.0, 0.2)]
    g = MultiGame(3.0, 0.5, 2.0, sus)
    assert optimal_order_uniform(g) == ("strong", "weak")
    eq = MultiGame(3.0, 0.5, 2.0, [SuProfile("p", 1, 1, 1, 1), SuProfile("q", 1, 1, 1, 1)])
    assert optimal_order_uniform(eq) == ("p", "q")
    bad = MultiGame(3.0, 0.5, 2.0, [SuProfile("p", 1, 1, 1, 1), SuProfile("q", 1, 2, 1, 1)])
    assert not is_uniform(bad)
    with pytest.raises(ValueError, match="brute_force_order"):
        optimal_order_uniform(bad)


def test_grant_algorithm_short_circuit_and_empty():
    sus = [SuProfile(f"s{i}", 0.5 - 0.1 * i, 5.0, 4.0, 0.05) for i in range(3)]
    g = MultiGame(2.0, 0.5, 3.0, sus)
    out = grant_algorithm(g)
    assert out.p0_sep == pytest.approx(1.5)
    assert out.alphas == (1.0, 1.0, 1.0) and set(out.allowed_sus) == {"s0", "s1", "s2"}
    empty = grant_algorithm(MultiGame(2.0, 0.5, 3.0, []))
    assert empty.p0_sep == pytest.approx(1.5)
    with pytest.raises(ValueError):
        grant_algorithm(g.with_order(("s2", "s1", "s0")))


def test_grant_algorithm_matches_exact_search_sec_vi():
    rng = np.random.default_rng(3)
    for beta in (0.1, 0.2):
        g = uniform_game(beta=beta, b=sorted(rng.exponential(1.0, 20), reverse=True))
        out = grant_algorithm(g)
        assert out.u0_sep == pytest.approx(pu_utility_multi(g, out.p0_sep, out.alphas), abs=1e-12)
        assert out.u0_sep == pytest.approx(leader_best_power(g)[1], abs=1e-9)
        assert set(out.allowed_sus) == {s.id for s, a in zip(g.sus, out.alphas) if a == 1.0}


def test_non_uniform_grant_warns():
    sus = [SuProfile("a", 0.9, 0.5, 4.5, 0.1), SuProfile("b", 0.3, 0.9, 4.5, 0.3)]
    with pytest.warns(RuntimeWarning):
        grant_algorithm(MultiGame(2.0, 0.2, 4.5, sus))


def test_brute_force_guard():
    sus = [SuProfile(f"s{i}", 1, 1, 1, 1) for i in range(9)]
    with pytest.raises(ValueError):
        brute_force_order(MultiGame(2.0, 0.2, 4.5, sus))


@st.composite
def pairs(draw):
    f = st.floats(0.1, 4.0)
    return GameParams(draw(f), draw(f), draw(f), draw(st.floats(0.05, 2.0)), draw(st.floats(0.05, 1.5)),
                      draw(st.floats(0.5, 6.0)), draw(st.floats(0.5, 6.0)))


def as_multi(g):
    return MultiGame(g.a, g.gamma_bar, g.p0_max, [SuProfile("x", g.b, g.c, g.p1_max, g.beta)], (), g.epsilon)


@settings(max_examples=150, deadline=None)
@given(pairs(), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_single_su_reduction(g, p_frac, alpha):
    m = as_multi(g)
    p = p_frac * g.p0_max
    assert pu_utility_multi(m, p, (alpha,)) == pytest.approx(pu_utility(g, p, alpha), abs=1e-12)
    assert su_utility_multi(m, 0, p, (alpha,)) == pytest.approx(su_utility(g, p, alpha), abs=1e-12)
    assert threshold_qi(m, 0, (alpha,)) == pytest.approx(threshold_q(g), abs=1e-12)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        sep = sep_strategy(g)
        out = grant_algorithm(m)
    assert out.p0_sep == pytest.approx(sep.p0, abs=1e-12)
    assert out.u0_sep == pytest.approx(sep.utilities.u0, abs=1e-12)
    assert out.alphas == (sep.alpha,)


def random_uniform(rng, n):
    k1 = rng.uniform(0.3, 6.0)
    k2 = rng.uniform(0.05, 0.8)
    p = rng.uniform(0.5, 4.0)
    sus = [SuProfile(f"s{i}", float(rng.exponential(1.0)), k1 / p, p, k2) for i in range(n)]
    return MultiGame(float(rng.uniform(1, 4)), float(rng.uniform(0.1, 1.5)), float(rng.uniform(1, 6)), sus)


def test_sep_dominates_simultaneous_play():
    rng = np.random.default_rng(17)
    checked = 0
    for _ in range(40):
        g = random_uniform(rng, int(rng.integers(1, 5)))
        g = g.with_order(descending_b_order(g))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            out = grant_algorithm(g)
        for p0, alphas in nash_equilibria_multi(g):
            checked += 1
            for i in range(g.n):
                assert out.su_utilities[i] >= su_utility_multi(g, i, p0, alphas) - 1e-9
    assert checked > 20


def test_su_led_play_never_helps_pu():
    rng = np.random.default_rng(23)
    for _ in range(30):
        g = random_uniform(rng, int(rng.integers(1, 4)))
        g = g.with_order(descending_b_order(g))
        nes = nash_equilibria_multi(g)
        if not nes:
            continue
        ne_u0 = max(pu_utility_multi(g, p, a) for p, a in nes)
        for i in range(g.n):
            best = None
            for al in np.linspace(0, 1, 6):
                eq = simultaneous_equilibrium(g, (1.0,) * g.n, fixed={i: float(al)})
                if eq is not None:
                    u = su_utility_multi(g, i, *eq)
                    if best is None or u > best[0]:
                        best = (u, eq)
            if best is not None:
                assert pu_utility_multi(g, *best[1]) <= ne_u0 + 1e-9


def test_order_values_and_brute_force_agree():
    rng = np.random.default_rng(5)
    g = random_uniform(rng, 4)
    vals = order_values(g)
    assert len(vals) == 24
    order, out = brute_force_order(g)
    assert out.u0_sep == pytest.approx(max(vals.values()), abs=1e-9)
    assert vals[optimal_order_uniform(g)] == pytest.approx(max(vals.values()), abs=1e-9)
