import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eavesgame.core import (
    ABOVE,
    BELOW,
    LN4,
    GameParams,
    alpha_q,
    alpha_tilde,
    alpha_tilde_value,
    capacity,
    p_hat,
    p_prime,
    p_prime_unclamped,
    p_star,
    p_star_full_alpha,
    pu_peak_utility,
    pu_utility,
    pu_utility_secrecy,
    su_utility,
    threshold_q,
)

SEC3 = dict(a=2.5, b=1.0, gamma_bar=1.0, beta=1.0, p0_max=1.0, p1_max=1.0)


def sec3(c):
    return GameParams(c=c, **SEC3)


def grid_argmax(params, alpha, n=200_001):
    p = np.linspace(0.0, params.p0_max, n)
    u = 0.5 * np.log2(1 + params.a * p) - (1 - alpha) * 0.5 * np.log2(1 + params.b * p) - params.gamma * p
    return p[int(np.argmax(u))], float(u.max())


pos = st.floats(0.05, 5.0)


@st.composite
def games(draw, strong=None):
    a = draw(pos)
    b = draw(pos)
    if strong is True:
        b = min(a, b)
    elif strong is False:
        b = a + draw(st.floats(0.05, 3.0))
    return GameParams(a, b, draw(pos), draw(st.floats(0.05, 2.0)), draw(st.floats(0.05, 1.5)),
                      draw(st.floats(0.5, 8.0)), draw(st.floats(0.5, 8.0)))


def test_params_validation():
    with pytest.raises(ValueError):
        GameParams(0.0, 1, 1, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        GameParams(1, 1, 1, 1, 1, 1, float("nan"))
    with pytest.raises(ValueError):
        GameParams(1, 1, 1, 1, 1, 1.0, 1, epsilon=1.0)
    assert sec3(5).gamma == pytest.approx(1 / LN4)
    assert sec3(5).with_(c=3.5).c == 3.5


def test_capacity():
    assert capacity(0.0) == 0.0
    assert capacity(3.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        capacity(-0.1)


def test_utilities_basic():
    g = sec3(5)
    assert pu_utility(g, 0.0, 0.3) == 0.0
    # full transmission removes the eavesdropping term
    p = 0.4
    assert pu_utility(g, p, 1.0) == pytest.approx(capacity(g.a * p) - g.gamma * p)
    assert su_utility(g, 0.3, 0.0) == 0.0
    # secrecy version clips a negative rate
    weak = GameParams(1.0, 2.0, 1, 1, 1, 1, 1)
    assert pu_utility_secrecy(weak, 0.5, 0.0) == pytest.approx(-weak.gamma * 0.5)


def test_threshold_examples():
    assert threshold_q(sec3(3.5)) == pytest.approx(0.0667, abs=1e-4)
    assert threshold_q(sec3(5.0)) == pytest.approx(0.2667, abs=1e-4)


def test_su_indifferent_at_threshold():
    g = sec3(5.0)
    q = threshold_q(g)
    assert su_utility(g, q, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert su_utility(g, q - 0.01, 1.0) > 0 > su_utility(g, q + 0.01, 1.0)


def test_p_prime_examples():
    g = sec3(3.5)
    assert p_prime(g, 0.0) == pytest.approx(0.1307, abs=1e-4)
    assert p_prime(g, 1.0) == pytest.approx(0.6, abs=1e-12)
    assert p_star_full_alpha(g) == pytest.approx(0.6)


def test_p_prime_matches_grid_when_concave():
    g = sec3(3.5)
    for alpha in (0.0, 0.25, 0.5, 0.9, 1.0):
        p_grid, _ = grid_argmax(g, alpha)
        assert p_prime(g, alpha) == pytest.approx(p_grid, abs=1e-4)


def test_p_hat_limits():
    g = sec3(1.0)
    assert p_hat(g, 0.0) < 0  # a >= b: concave everywhere on p0 >= 0
    weak = GameParams(1.0, 3.0, 1, 1, 1, 1, 1)
    assert p_hat(weak, 0.0) > 0
    assert p_hat(g, 0.0) == -math.inf or math.isfinite(p_hat(g, 0.0))


def test_alpha_q_example():
    assert alpha_q(sec3(5.0)) == pytest.approx(0.3667, abs=1e-4)
    g = sec3(5.0)
    assert p_prime(g, alpha_q(g)) == pytest.approx(threshold_q(g), abs=1e-12)
    # threshold below P'(0): no alpha reaches it
    assert alpha_q(sec3(3.5)) is None


def test_alpha_tilde_example():
    g = GameParams(1.0, 3.0, 1.0, 0.3, 1.0, 5.0, 1.0)
    at = alpha_tilde(g)
    assert at == pytest.approx(0.7157, abs=1e-4)
    assert pu_peak_utility(g, at) == pytest.approx(0.0, abs=1e-12)
    assert pu_peak_utility(g, at - 1e-3) <= 0 < pu_peak_utility(g, at + 1e-3)


def test_alpha_tilde_sentinels():
    never = GameParams(1.0, 3.0, 1.0, 2.0, 1.0, 5.0, 1.0)
    assert alpha_tilde(never) == ABOVE
    assert alpha_tilde_value(never) == 1.0
    always = GameParams(3.0, 1.0, 1.0, 0.3, 1.0, 5.0, 1.0)
    assert alpha_tilde(always) == BELOW
    assert alpha_tilde_value(always) == 0.0


@settings(max_examples=200, deadline=None)
@given(games(), st.floats(0.0, 1.0))
def test_p_star_is_global_best_response(g, alpha):
    p = p_star(g, alpha)
    _, u_grid = grid_argmax(g, alpha, 20_001)
    slack = (g.a + g.b) * g.p0_max / 20_000
    assert pu_utility(g, p, alpha) >= u_grid - slack - 1e-12


@settings(max_examples=200, deadline=None)
@given(games(strong=True), st.floats(0.0, 1.0))
def test_p_prime_stationary_when_interior(g, alpha):
    root = p_prime_unclamped(g, alpha)
    assert root is not None
    if 1e-6 < root < g.p0_max - 1e-6:
        h = 1e-6
        d = (pu_utility(g, root + h, alpha) - pu_utility(g, root - h, alpha)) / (2 * h)
        assert abs(d) < 1e-6


@settings(max_examples=100, deadline=None)
@given(games(strong=True))
def test_p_prime_nondecreasing_in_alpha(g):
    vals = [p_prime(g, al) for al in np.linspace(0, 1, 21)]
    assert all(y >= x - 1e-12 for x, y in zip(vals, vals[1:]))


@settings(max_examples=100, deadline=None)
@given(games(strong=False))
def test_peak_utility_nondecreasing(g):
    vals = [pu_peak_utility(g, al) for al in np.linspace(0, 1, 21)]
    assert all(y >= x - 1e-12 for x, y in zip(vals, vals[1:]))
