"""One PU and several eavesdropping SUs sharing a successive-cancellation decoder.

SUs are listed in ``MultiGame.sus``; ``MultiGame.order`` is the decoding
priority, highest first. An SU's signal is decoded before those of every SU
ahead of it in ``order``, so it sees their transmissions as interference.
Per-SU decision vectors (``alphas``) are aligned with ``MultiGame.sus``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import AbstractSet, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import LN4, GameParams, capacity, p_prime, p_star
from .optimize import grid_golden_max
from .stackelberg import backoff_step

MAX_BRUTE_FORCE_N = 8


@dataclass(frozen=True)
class SuProfile:
    id: str
    b: float
    c: float
    p_max: float
    beta: float

    def __post_init__(self):
        for name in ("b", "c", "p_max", "beta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"SU {self.id}: {name} must be positive")

    @property
    def k(self) -> float:
        """Received SU power ``c * p_max``."""
        return self.c * self.p_max


@dataclass(frozen=True)
class MultiGame:
    a: float
    gamma_bar: float
    p0_max: float
    sus: Tuple[SuProfile, ...]
    order: Tuple[str, ...] = ()
    epsilon: float = 1e-3
    _rank: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "sus", tuple(self.sus))
        ids = [s.id for s in self.sus]
        if len(set(ids)) != len(ids):
            raise ValueError("SU ids must be unique")
        if not self.order:
            object.__setattr__(self, "order", tuple(ids))
        object.__setattr__(self, "order", tuple(self.order))
        if sorted(self.order) != sorted(ids):
            raise ValueError("order must be a permutation of the SU ids")
        for name in ("a", "gamma_bar", "p0_max", "epsilon"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        object.__setattr__(self, "_rank", {sid: r for r, sid in enumerate(self.order)})

    @property
    def n(self) -> int:
        return len(self.sus)

    @property
    def gamma(self) -> float:
        return self.gamma_bar / LN4

    def index(self, su_id: str) -> int:
        for i, s in enumerate(self.sus):
            if s.id == su_id:
                return i
        raise KeyError(su_id)

    def priority_indices(self) -> List[int]:
        """SU indices from highest decoding priority to lowest."""
        return [self.index(sid) for sid in self.order]

    def higher_priority(self, i: int) -> List[int]:
        """Indices of SUs whose signals interfere when SU ``i`` is decoded."""
        r = self._rank[self.sus[i].id]
        return [self.index(sid) for sid in self.order[:r]]

    def with_order(self, order: Sequence[str]) -> "MultiGame":
        return replace(self, order=tuple(order))

    def pair(self, i: int) -> GameParams:
        """Two-player game between the PU and SU ``i`` alone."""
        s = self.sus[i]
        return GameParams(
            a=self.a,
            b=s.b,
            c=s.c,
            gamma_bar=self.gamma_bar,
            beta=s.beta,
            p0_max=self.p0_max,
            p1_max=s.p_max,
            epsilon=self.epsilon,
        )


@dataclass(frozen=True)
class MultiOutcome:
    p0_sep: float
    alphas: Tuple[float, ...]
    allowed_sus: Tuple[str, ...]
    u0_sep: float
    su_utilities: Tuple[float, ...]
    order: Tuple[str, ...] = ()
    algorithm_u0: Optional[float] = None


def _all_ones(game: MultiGame) -> Tuple[float, ...]:
    return (1.0,) * game.n


def pu_utility_multi(game: MultiGame, p0: float, alphas: Sequence[float]) -> float:
    leak = max(((1.0 - al) * capacity(s.b * p0) for s, al in zip(game.sus, alphas)), default=0.0)
    return capacity(game.a * p0) - leak - game.gamma * p0


def dominating_su(game: MultiGame, p0: float, alphas: Sequence[float]) -> Optional[int]:
    """Index of the SU whose eavesdropped rate sets the PU's loss, if any."""
    best, best_i = 0.0, None
    for i, (s, al) in enumerate(zip(game.sus, alphas)):
        leak = (1.0 - al) * capacity(s.b * p0)
        if leak > best:
            best, best_i = leak, i
    return best_i


def _interference(game: MultiGame, i: int, alphas: Sequence[float]) -> float:
    return sum(alphas[j] * game.sus[j].k for j in game.higher_priority(i))


def su_utility_multi(game: MultiGame, i: int, p0: float, alphas: Sequence[float]) -> float:
    s = game.sus[i]
    sinr = s.k / (1.0 + game.a * p0 + _interference(game, i, alphas))
    return alphas[i] * (capacity(sinr) - s.beta)


def threshold_qi(game: MultiGame, i: int, alphas: Sequence[float]) -> float:
    s = game.sus[i]
    return (s.k / (2.0 ** (2.0 * s.beta) - 1.0) - 1.0 - _interference(game, i, alphas)) / game.a


def followers_cascade(game: MultiGame, p0: float, blocked: AbstractSet[int] = frozenset()) -> Tuple[float, ...]:
    """SU replies to an announced PU power, resolved from the top decoding priority down.

    An SU exactly at its threshold eavesdrops. SUs in ``blocked`` are denied
    access and always eavesdrop.
    """
    alphas = [0.0] * game.n
    for i in game.priority_indices():
        if i not in blocked:
            alphas[i] = 1.0 if p0 < threshold_qi(game, i, alphas) else 0.0
    return tuple(alphas)


def outcome_at(game: MultiGame, p0: float, algorithm_u0: Optional[float] = None) -> MultiOutcome:
    alphas = followers_cascade(game, p0)
    allowed = tuple(s.id for s, al in zip(game.sus, alphas) if al == 1.0)
    return MultiOutcome(
        p0_sep=p0,
        alphas=alphas,
        allowed_sus=allowed,
        u0_sep=pu_utility_multi(game, p0, alphas),
        su_utilities=tuple(su_utility_multi(game, i, p0, alphas) for i in range(game.n)),
        order=game.order,
        algorithm_u0=algorithm_u0,
    )


def is_uniform(game: MultiGame, tol: float = 1e-12) -> bool:
    if game.n <= 1:
        return True
    k0, b0 = game.sus[0].k, game.sus[0].beta
    return all(
        math.isclose(s.k, k0, rel_tol=tol, abs_tol=tol)
        and math.isclose(s.beta, b0, rel_tol=tol, abs_tol=tol)
        for s in game.sus
    )


def descending_b_order(game: MultiGame) -> Tuple[str, ...]:
    """Strongest eavesdropper first; stable for equal gains."""
    return tuple(s.id for s in sorted(game.sus, key=lambda s: -s.b))


def optimal_order_uniform(game: MultiGame) -> Tuple[str, ...]:
    if not is_uniform(game):
        raise ValueError(
            "SU parameters are not uniform (c*p_max and beta must match); "
            "use brute_force_order for the general case"
        )
    return descending_b_order(game)


def p_full_multi(game: MultiGame) -> float:
    """PU best power when nobody eavesdrops."""
    return min(game.p0_max, max(0.0, 1.0 / game.gamma_bar - 1.0 / game.a))


def _p_zero(game: MultiGame, i: int) -> float:
    """PU best power when SU ``i`` is the strongest eavesdropper left."""
    return p_star(game.pair(i), 0.0)


def _u0_eavesdropped_by(game: MultiGame, rank_idx: List[int], r: int, p0: float) -> float:
    """PU utility with SU at priority rank ``r`` eavesdropping and all stronger ones transmitting."""
    if r >= len(rank_idx):
        return capacity(game.a * p0) - game.gamma * p0
    s = game.sus[rank_idx[r]]
    return capacity(game.a * p0) - capacity(s.b * p0) - game.gamma * p0


def _backoff(game: MultiGame, q: float) -> float:
    return max(q - backoff_step(game.a, game.gamma_bar, game.epsilon, q), 0.0)


def grant_algorithm(game: MultiGame) -> MultiOutcome:
    """Pick the PU's leader power and the SUs that get decoded.

    Requires the decoding order to rank SUs by descending eavesdropper gain.
    The returned alphas are the SUs' actual replies to the chosen power;
    ``algorithm_u0`` keeps the value the iteration itself tracked.
    """
    p_full = p_full_multi(game)
    if game.n == 0:
        return MultiOutcome(p_full, (), (), capacity(game.a * p_full) - game.gamma * p_full, ())
    rank_idx = game.priority_indices()
    gains = [game.sus[i].b for i in rank_idx]
    if any(gains[r] < gains[r + 1] for r in range(len(gains) - 1)):
        raise ValueError("grant_algorithm needs the decoding order sorted by descending b")
    if not is_uniform(game):
        warnings.warn(
            "non-uniform SU parameters: descending-b decoding order is a heuristic here",
            RuntimeWarning,
            stacklevel=2,
        )
    ones = _all_ones(game)
    qs = [threshold_qi(game, i, ones) for i in rank_idx]
    if all(q >= p_full for q in qs):
        return outcome_at(game, p_full, capacity(game.a * p_full) - game.gamma * p_full)

    j = next(r for r, q in enumerate(qs) if q < p_full)
    p_sep, u_sep = 0.0, 0.0
    for r in range(j, game.n):
        p_r0 = _p_zero(game, rank_idx[r])
        q_prev = qs[r - 1] if r > 0 else math.inf
        if qs[r] >= p_r0:
            p_sep = _backoff(game, qs[r])
            u_sep = _u0_eavesdropped_by(game, rank_idx, r + 1, p_sep)
        else:
            u_r = _u0_eavesdropped_by(game, rank_idx, r, p_r0)
            if u_r >= u_sep and p_r0 <= q_prev:
                p_sep, u_sep = p_r0, u_r
            if qs[r] > 0.0:
                p_q = _backoff(game, qs[r])
                u_q = _u0_eavesdropped_by(game, rank_idx, r + 1, p_q)
                if u_q >= u_sep:
                    p_sep, u_sep = p_q, u_q
    return outcome_at(game, p_sep, u_sep)


# ---------------------------------------------------------------------------
# exact leader search for an arbitrary decoding order


def cascade_segments(game: MultiGame, blocked: AbstractSet[int] = frozenset()) -> List[Tuple[float, float, Tuple[float, ...]]]:
    """Split ``[0, p0_max]`` into intervals ``[lo, hi)`` with a constant SU reply."""
    segments = []
    p = 0.0
    for _ in range(10_000):
        if p >= game.p0_max:
            break
        alphas = followers_cascade(game, p, blocked)
        ths = [threshold_qi(game, i, alphas) for i in range(game.n) if i not in blocked]
        nxt = min([t for t in ths if t > p] + [game.p0_max])
        segments.append((p, nxt, alphas))
        p = nxt
    else:
        raise RuntimeError("cascade segmentation did not terminate")
    return segments


def leader_best_power(game: MultiGame, blocked: AbstractSet[int] = frozenset()) -> Tuple[float, float]:
    """Best PU power against the followers' cascade, as ``(p0, u0)``.

    Within a segment the dominating eavesdropper is fixed, so the utility is a
    two-player PU utility; its maximum sits at an end of the segment (the open
    upper end is approached by the epsilon backoff) or at a stationary point.
    """
    best_p, best_u = 0.0, pu_utility_multi(game, 0.0, followers_cascade(game, 0.0, blocked))
    p_full = p_full_multi(game)
    for lo, hi, alphas in cascade_segments(game, blocked):
        cands = [lo]
        if hi >= game.p0_max:
            cands.append(game.p0_max)
        else:
            cands.append(max(hi - backoff_step(game.a, game.gamma_bar, game.epsilon, hi), lo))
        k = dominating_su(game, max(hi, 1e-12), alphas)
        if k is None:
            cands.append(p_full)
        else:
            pair = game.pair(k)
            cands.append(p_star(pair, 0.0))
            pp = p_prime(pair, 0.0)
            if pp is not None:
                cands.append(pp)
        for p in cands:
            if not lo <= p <= hi or (p == hi and hi < game.p0_max):
                continue
            u = pu_utility_multi(game, p, followers_cascade(game, p, blocked))
            if u > best_u or (u == best_u and p < best_p):
                best_p, best_u = p, u
    return best_p, best_u


def cascade_grid(game: MultiGame, p_grid: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`followers_cascade` and PU utility over a power grid.

    Returns ``(alphas, u0)`` with ``alphas`` of shape ``(n, len(p_grid))``.
    """
    p = np.asarray(p_grid, dtype=float)
    alphas = np.zeros((game.n, p.size))
    for i in game.priority_indices():
        s = game.sus[i]
        interference = sum(alphas[j] * game.sus[j].k for j in game.higher_priority(i))
        q = (s.k / (2.0 ** (2.0 * s.beta) - 1.0) - 1.0 - interference) / game.a
        alphas[i] = (p < q).astype(float)
    leak = np.zeros(p.size)
    for i, s in enumerate(game.sus):
        leak = np.maximum(leak, (1.0 - alphas[i]) * 0.5 * np.log2(1.0 + s.b * p))
    u0 = 0.5 * np.log2(1.0 + game.a * p) - leak - game.gamma * p
    return alphas, u0


def brute_force_order(game: MultiGame, grid_n: int = 2000) -> Tuple[Tuple[str, ...], MultiOutcome]:
    """Try every decoding order and keep the one giving the PU the most.

    Each order's leader power comes from :func:`leader_best_power`. A
    ``grid_n``-point scan backs it up; it only overrides the exact search when
    it finds more than ``epsilon`` extra, since grid points squeezed between a
    threshold and its backoff are not a real gain. Ties keep the earlier order.
    """
    if game.n > MAX_BRUTE_FORCE_N:
        raise ValueError(f"brute force over {game.n}! orders refused (limit N <= {MAX_BRUTE_FORCE_N})")
    grid = np.linspace(0.0, game.p0_max, grid_n)
    best = None
    for perm in itertools.permutations(game.order):
        g = game.with_order(perm)
        p, u = leader_best_power(g)
        _, u_grid = cascade_grid(g, grid)
        k = int(np.argmax(u_grid))
        if u_grid[k] > u + game.epsilon:
            p, u = float(grid[k]), float(u_grid[k])
        if best is None or u > best[1].u0_sep:
            best = (tuple(perm), outcome_at(g, p))
    return best


def order_values(game: MultiGame) -> Dict[Tuple[str, ...], float]:
    """Leader utility for every decoding order."""
    if game.n > MAX_BRUTE_FORCE_N:
        raise ValueError("too many SUs to enumerate orders")
    return {perm: leader_best_power(game.with_order(perm))[1] for perm in itertools.permutations(game.order)}


# ---------------------------------------------------------------------------
# simultaneous-move equilibrium (used to check the leader outcome against)


def pu_best_response_multi(game: MultiGame, alphas: Sequence[float]) -> float:
    if any(0.0 < al < 1.0 for al in alphas):
        # fractional decisions: the max over eavesdroppers is not a single pair utility
        p, u = grid_golden_max(lambda x: pu_utility_multi(game, x, alphas), 0.0, game.p0_max)
        return p if u > 0.0 else 0.0
    eaves = [i for i, al in enumerate(alphas) if al < 1.0]
    if not eaves:
        return p_full_multi(game)
    k = max(eaves, key=lambda i: game.sus[i].b)
    return p_star(game.pair(k), 0.0)


def su_best_responses(game: MultiGame, p0: float, alphas: Sequence[float]) -> Tuple[float, ...]:
    return tuple(1.0 if p0 < threshold_qi(game, i, alphas) else 0.0 for i in range(game.n))


def simultaneous_equilibrium(
    game: MultiGame, start: Sequence[float], fixed: Optional[Dict[int, float]] = None, max_rounds: int = 200
) -> Optional[Tuple[float, Tuple[float, ...]]]:
    """Synchronous best-response iteration from a starting SU profile.

    ``fixed`` pins some SUs' decisions (a committed leader). Returns
    ``(p0, alphas)`` once the profile is unchanged for two rounds, or None.
    """
    fixed = fixed or {}
    alphas = tuple(fixed.get(i, a) for i, a in enumerate(start))
    p0 = pu_best_response_multi(game, alphas)
    stable = 0
    for _ in range(max_rounds):
        new_p0 = pu_best_response_multi(game, alphas)
        new_alphas = tuple(fixed.get(i, a) for i, a in enumerate(su_best_responses(game, p0, alphas)))
        if new_p0 == p0 and new_alphas == alphas:
            stable += 1
            if stable >= 2:
                return p0, alphas
        else:
            stable = 0
        p0, alphas = new_p0, new_alphas
    return None


def nash_equilibria_multi(game: MultiGame) -> List[Tuple[float, Tuple[float, ...]]]:
    found = []
    for start in (_all_ones(game), (0.0,) * game.n):
        eq = simultaneous_equilibrium(game, start)
        if eq is not None and eq not in found:
            found.append(eq)
    return found
