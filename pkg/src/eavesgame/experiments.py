"""Experiment runner: dispatches configs to the solvers and serializes result tables."""

from __future__ import annotations

import csv
import io
import json
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .bayes import BeliefModel, monte_carlo_compare, p_b
from .config import ConfigError, ExperimentConfig
from .core import GameParams, alpha_q, alpha_tilde_value, p_prime, p_star, pu_utility, threshold_q
from .multi import (
    MultiGame,
    SuProfile,
    brute_force_order,
    descending_b_order,
    grant_algorithm,
    leader_best_power,
    order_values,
    outcome_at,
    pu_utility_multi,
    MAX_BRUTE_FORCE_N,
)
from .nash import pu_utility_grid, solve_nash, verify_equilibrium
from .stackelberg import dominance_check, ses_strategy, sep_strategy

WORKERS_ENV = "EAVESGAME_WORKERS"
SIG_DIGITS = 12
VERIFY_GRID = 100_000
SLACK = 1e-9

TARGETS = (
    "example-sec3",
    "fig-reaction-curves",
    "fig-pu-utility-hidden",
    "fig-su-utility-hidden",
    "fig-order-example",
    "fig-order-uniform",
    "fig-uniform-campaign",
    "fig-nonuniform-campaign",
)


class SolverPreconditionError(RuntimeError):
    """A solver refused its input (maps to exit code 3)."""


@dataclass
class RunArtifact:
    mode: str
    columns: List[str]
    rows: List[Dict[str, Any]]
    config: Dict[str, Any] = field(default_factory=dict)
    target: Optional[str] = None
    version: str = __version__

    @property
    def all_verified(self) -> bool:
        return all(r.get("verified") in (True, None, "") for r in self.rows)


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def _map(fn: Callable, jobs: Sequence, workers: int) -> list:
    """Ordered map; results come back in job order whatever the pool does."""
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _points(cfg: ExperimentConfig) -> List[Dict[str, Any]]:
    if cfg.sweep is None:
        return [dict(cfg.params)]
    return [dict(cfg.params, **{cfg.sweep.variable: v}) for v in cfg.sweep.values]


def _pair(p: Dict[str, Any]) -> GameParams:
    return GameParams(**{k: p[k] for k in ("a", "b", "c", "gamma_bar", "beta", "p0_max", "p1_max", "epsilon")})


def _multi(p: Dict[str, Any]) -> MultiGame:
    sus = [SuProfile(s["id"], s["b"], s["c"], s["p_max"], s["beta"]) for s in p["sus"]]
    return MultiGame(p["a"], p["gamma_bar"], p["p0_max"], sus, tuple(p.get("order") or ()), p["epsilon"])


PAIR_COLS = ["a", "b", "c", "gamma_bar", "beta", "p0_max", "p1_max", "epsilon"]


# ---------------------------------------------------------------------------
# two-player modes


NASH_COLS = ["index"] + PAIR_COLS + [
    "case", "q", "alpha_q", "alpha_tilde", "pu_support", "pu_power", "su_alpha",
    "u0", "u1", "u0_q_full", "verified", "worst_deviation",
]


def _support_str(support) -> str:
    return ";".join(f"{_fmt(p)}:{_fmt(w)}" for p, w in support)


def _nash_row(job) -> Dict[str, Any]:
    idx, point, verify = job
    g = _pair(point)
    out = solve_nash(g)
    q = threshold_q(g)
    row = dict(index=idx, **{k: point[k] for k in PAIR_COLS})
    row.update(
        case=out.case,
        q=q,
        alpha_q=alpha_q(g),
        alpha_tilde=alpha_tilde_value(g) if g.a < g.b else None,
        pu_support=_support_str(out.pu_support),
        pu_power=out.pu_power,
        su_alpha=out.su_alpha,
        u0=out.utilities.u0,
        u1=out.utilities.u1,
        u0_q_full=pu_utility(g, q, 1.0) if 0.0 <= q <= g.p0_max else None,
        verified=None,
        worst_deviation=None,
    )
    if verify:
        rep = verify_equilibrium(g, out, VERIFY_GRID)
        row.update(verified=rep.passed, worst_deviation=rep.worst_deviation)
    return row


SEP_COLS = ["index"] + PAIR_COLS + [
    "case", "q", "p0", "alpha", "u0", "u1", "leader_value", "ne_u0", "ne_u1", "dominates", "verified",
]


def _sep_row(job) -> Dict[str, Any]:
    idx, point, verify = job
    g = _pair(point)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        out = sep_strategy(g)
    ne = solve_nash(g)
    dom = dominance_check(g, out, ne)
    row = dict(index=idx, **{k: point[k] for k in PAIR_COLS})
    row.update(
        case=out.case, q=threshold_q(g), p0=out.p0, alpha=out.alpha,
        u0=out.utilities.u0, u1=out.utilities.u1, leader_value=out.leader_value,
        ne_u0=ne.utilities.u0, ne_u1=ne.utilities.u1, dominates=dom.dominates, verified=None,
    )
    if verify:
        row["verified"] = dom.dominates and out.utilities.u0 >= out.leader_value - g.epsilon - SLACK
    return row


SES_COLS = ["index"] + PAIR_COLS + [
    "case", "alpha", "p0", "u0", "u1", "ne_u0", "ne_u1", "pu_reply_gap", "verified",
]


def _ses_row(job) -> Dict[str, Any]:
    idx, point, verify = job
    g = _pair(point)
    out = ses_strategy(g)
    ne = solve_nash(g)
    row = dict(index=idx, **{k: point[k] for k in PAIR_COLS})
    row.update(
        case=out.case, alpha=out.alpha, p0=out.p0, u0=out.utilities.u0, u1=out.utilities.u1,
        ne_u0=ne.utilities.u0, ne_u1=ne.utilities.u1, pu_reply_gap=None, verified=None,
    )
    if verify:
        grid = np.linspace(0.0, g.p0_max, VERIFY_GRID)
        gap = max(float(pu_utility_grid(g, grid, out.alpha).max()) - out.utilities.u0, 0.0)
        tol = 1e-6 + (g.a + g.b) * g.p0_max / (VERIFY_GRID - 1)
        row["pu_reply_gap"] = gap
        row["verified"] = gap <= tol and out.utilities.u0 <= ne.utilities.u0 + SLACK
    return row


BAYES_COLS = [
    "index", "c", "b_bar", "n_samples", "seed", "avg_u0_revealed", "avg_u0_hidden",
    "avg_u1_revealed", "avg_u1_hidden", "se_u0_diff", "se_u1_diff", "hidden_p0", "hidden_alpha", "verified",
]


def _run_bayes(cfg: ExperimentConfig, verify: bool, workers: int) -> List[Dict[str, Any]]:
    g = _pair(cfg.params)
    recs = monte_carlo_compare(g, cfg.c_values, cfg.b_bar_values, cfg.n_samples, cfg.seed, workers)
    rows = []
    for i, r in enumerate(recs):
        row = dict(
            index=i, c=r.c, b_bar=r.b_bar, n_samples=r.n_samples, seed=r.seed,
            avg_u0_revealed=r.avg_u0_revealed, avg_u0_hidden=r.avg_u0_hidden,
            avg_u1_revealed=r.avg_u1_revealed, avg_u1_hidden=r.avg_u1_hidden,
            se_u0_diff=r.se_u0_diff, se_u1_diff=r.se_u1_diff,
            hidden_p0=r.hidden_p0, hidden_alpha=r.hidden_alpha, verified=None,
        )
        if verify:
            # knowing b never hurts the PU beyond the leader's epsilon backoff
            row["verified"] = r.avg_u0_revealed >= r.avg_u0_hidden - g.epsilon
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# multi-user mode


MULTI_COLS = [
    "index", "a", "gamma_bar", "p0_max", "epsilon", "n_sus", "order", "method", "p0_sep", "alphas",
    "allowed_sus", "u0_sep", "algorithm_u0", "su_utilities", "best_order", "best_order_u0", "verified",
]


def _multi_row(job) -> Dict[str, Any]:
    idx, point, verify = job
    game = _multi(point)
    if game.order == descending_b_order(game):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            out = grant_algorithm(game)
        method = "algorithm"
    else:
        out = outcome_at(game, leader_best_power(game)[0])
        method = "exact-search"
    row = dict(
        index=idx, a=game.a, gamma_bar=game.gamma_bar, p0_max=game.p0_max, epsilon=game.epsilon,
        n_sus=game.n, order="|".join(game.order), method=method, p0_sep=out.p0_sep,
        alphas=";".join(_fmt(a) for a in out.alphas), allowed_sus="|".join(out.allowed_sus),
        u0_sep=out.u0_sep, algorithm_u0=out.algorithm_u0,
        su_utilities=";".join(_fmt(u) for u in out.su_utilities),
        best_order=None, best_order_u0=None, verified=None,
    )
    if 0 < game.n <= MAX_BRUTE_FORCE_N:
        best_order, best = brute_force_order(game)
        row.update(best_order="|".join(best_order), best_order_u0=best.u0_sep)
    if verify:
        recomputed = pu_utility_multi(game, out.p0_sep, out.alphas)
        ok = abs(recomputed - out.u0_sep) <= 1e-12
        if game.n:
            ok = ok and out.u0_sep >= leader_best_power(game)[1] - SLACK
        row["verified"] = ok
    return row


# ---------------------------------------------------------------------------
# dispatch


def run(cfg: ExperimentConfig, verify: bool = False, workers: Optional[int] = None) -> RunArtifact:
    workers = default_workers() if workers is None else workers
    if cfg.mode == "reproduce":
        return reproduce(cfg.target, n_samples=cfg.n_samples, seed=cfg.seed, workers=workers)
    try:
        if cfg.mode == "bayes":
            rows = _run_bayes(cfg, verify, workers)
            cols = BAYES_COLS
        else:
            fn, cols = {
                "nash": (_nash_row, NASH_COLS),
                "sep": (_sep_row, SEP_COLS),
                "ses": (_ses_row, SES_COLS),
                "multi": (_multi_row, MULTI_COLS),
            }[cfg.mode]
            jobs = [(i, p, verify) for i, p in enumerate(_points(cfg))]
            rows = _map(fn, jobs, workers)
    except (ValueError, ArithmeticError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise SolverPreconditionError(str(exc)) from exc
    return RunArtifact(cfg.mode, list(cols), rows, config=cfg.raw)


# ---------------------------------------------------------------------------
# reproduce targets


SEC3 = dict(a=2.5, b=1.0, gamma_bar=1.0, beta=1.0, p0_max=1.0, p1_max=1.0, epsilon=1e-3)
FIG2 = dict(a=3.0, b=0.7, c=1.0, gamma_bar=1.0, beta=1.0, p0_max=10.0, p1_max=10.0, epsilon=1e-3)
FIG2_B_BAR = 0.7
HIDDEN = dict(a=3.0, b=1.0, c=1.0, gamma_bar=1.0, beta=1.0, p0_max=5.0, p1_max=5.0, epsilon=1e-2)
HIDDEN_B_BAR = (0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0, 3.0, 5.0)
ORDER_SUS = (("1", 0.7, 0.6, 1.5, 0.1), ("2", 0.4, 0.35, 1.5, 0.25))
# k1 = c * p_max = 0.8625 for both SUs
ORDER_UNIFORM_SUS = (("1", 0.7, 0.575, 1.5, 0.25), ("2", 0.4, 0.575, 1.5, 0.25))
GAMMA_READINGS = (("gamma=0.5", 0.5 * np.log(4.0)), ("gamma_bar=0.5", 0.5))
CAMPAIGN = dict(a=2.0, gamma_bar=0.2, p0_max=4.5, c=0.5, p_max=4.5, epsilon=1e-3)
CAMPAIGN_MAX_N = 20
CAMPAIGN_DEFAULT_SAMPLES = 500


def _sec3_rows() -> List[Dict[str, Any]]:
    rows = []
    for c in (3.5, 5.0):
        g = GameParams(c=c, **SEC3)
        ne = solve_nash(g)
        q = threshold_q(g)
        aq = alpha_q(g)
        rows.append(dict(
            c=c, q=q, p_prime_0=p_prime(g, 0.0), p_prime_1=p_prime(g, 1.0), ne_case=ne.case,
            ne_p0=ne.pu_power, ne_alpha=ne.su_alpha, ne_u0=ne.utilities.u0, alpha_q=aq,
            u0_q_alpha_q=pu_utility(g, q, aq) if aq is not None else None,
            u0_q_full=pu_utility(g, q, 1.0),
        ))
    return rows


def _reaction_rows(n_alpha: int = 101) -> List[Dict[str, Any]]:
    g = GameParams(**FIG2)
    belief = BeliefModel(FIG2_B_BAR)
    rows = []
    for al in np.linspace(0.0, 1.0, n_alpha):
        al = float(al)
        rows.append(dict(alpha=al, p_b=p_b(g, belief, al), p_star=p_star(g, al)))
    return rows


def _hidden_rows(c_values, n_samples, seed, workers) -> List[Dict[str, Any]]:
    g = GameParams(**HIDDEN)
    recs = monte_carlo_compare(g, c_values, HIDDEN_B_BAR, n_samples, seed, workers)
    return [
        dict(
            c=r.c, b_bar=r.b_bar, n_samples=r.n_samples, seed=r.seed,
            avg_u0_revealed=r.avg_u0_revealed, avg_u0_hidden=r.avg_u0_hidden,
            avg_u1_revealed=r.avg_u1_revealed, avg_u1_hidden=r.avg_u1_hidden,
            se_u0_diff=r.se_u0_diff, se_u1_diff=r.se_u1_diff,
        )
        for r in recs
    ]


def _order_rows(sus_spec) -> List[Dict[str, Any]]:
    rows = []
    for label, gb in GAMMA_READINGS:
        sus = [SuProfile(*s) for s in sus_spec]
        game = MultiGame(3.0, float(gb), 1.5, sus)
        vals = order_values(game)
        for order, u0 in vals.items():
            p0, _ = leader_best_power(game.with_order(order))
            out = outcome_at(game.with_order(order), p0)
            rows.append(dict(
                gamma_reading=label, gamma_bar=float(gb), priority="|".join(order), p0=p0,
                alphas=";".join(_fmt(a) for a in out.alphas), u0=u0,
            ))
    return rows


def campaign_game(b_draws, c_draws, n, beta) -> MultiGame:
    """First ``n`` SUs of a realization, in descending-b decoding order."""
    sus = [
        SuProfile(f"su{i + 1}", float(b_draws[i]),
                  float(c_draws[i]) if c_draws is not None else CAMPAIGN["c"], CAMPAIGN["p_max"], beta)
        for i in range(n)
    ]
    g = MultiGame(CAMPAIGN["a"], CAMPAIGN["gamma_bar"], CAMPAIGN["p0_max"], sus, (), CAMPAIGN["epsilon"])
    return g.with_order(descending_b_order(g))


def _campaign_point(job) -> Dict[str, Any]:
    beta, n, b_mat, c_mat = job
    none, single, alg, granted = [], [], [], []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for k in range(b_mat.shape[0]):
            g = campaign_game(b_mat[k], None if c_mat is None else c_mat[k], n, beta)
            strongest = g.index(g.order[0])
            everyone = frozenset(range(n))
            none.append(leader_best_power(g, everyone)[1])
            single.append(leader_best_power(g, everyone - {strongest})[1])
            out = grant_algorithm(g)
            alg.append(out.u0_sep)
            granted.append(len(out.allowed_sus))
    return dict(
        beta=beta, n_sus=n, n_samples=b_mat.shape[0], avg_u0_none=float(np.mean(none)),
        avg_u0_single=float(np.mean(single)), avg_u0_algorithm=float(np.mean(alg)),
        avg_granted=float(np.mean(granted)),
    )


def _campaign_rows(uniform: bool, n_samples: int, seed: int, workers: int) -> List[Dict[str, Any]]:
    rng = np.random.default_rng(seed)
    b_mat = rng.standard_exponential((n_samples, CAMPAIGN_MAX_N))
    c_mat = None if uniform else CAMPAIGN["c"] * rng.standard_exponential((n_samples, CAMPAIGN_MAX_N))
    jobs = [(beta, n, b_mat, c_mat) for beta in (0.1, 0.2) for n in range(1, CAMPAIGN_MAX_N + 1)]
    return _map(_campaign_point, jobs, workers)


def reproduce(
    target: Optional[str], n_samples: Optional[int] = None, seed: int = 0, workers: Optional[int] = None
) -> RunArtifact:
    """Data behind a named example or figure."""
    workers = default_workers() if workers is None else workers
    if target not in TARGETS:
        raise ConfigError(f"unknown target {target!r}; choose from {', '.join(TARGETS)}", "target")
    if target == "example-sec3":
        rows = _sec3_rows()
    elif target == "fig-reaction-curves":
        rows = _reaction_rows()
    elif target == "fig-pu-utility-hidden":
        rows = _hidden_rows((0.7, 1.3), n_samples or 10_000, seed, workers)
    elif target == "fig-su-utility-hidden":
        rows = _hidden_rows((0.5, 0.7, 1.3), n_samples or 10_000, seed, workers)
    elif target == "fig-order-example":
        rows = _order_rows(ORDER_SUS)
    elif target == "fig-order-uniform":
        rows = _order_rows(ORDER_UNIFORM_SUS)
    else:
        rows = _campaign_rows(target == "fig-uniform-campaign", n_samples or CAMPAIGN_DEFAULT_SAMPLES, seed, workers)
    cols = list(rows[0].keys())
    return RunArtifact("reproduce", cols, rows, config={"target": target}, target=target)


# ---------------------------------------------------------------------------
# serialization


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        s = format(float(v), f".{SIG_DIGITS}g")
        return "0" if s == "-0" else s
    return str(v)


def _json_value(v: Any) -> Any:
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(_fmt(v))
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def to_csv(art: RunArtifact) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(art.columns)
    for r in art.rows:
        w.writerow([_fmt(r.get(c)) for c in art.columns])
    return buf.getvalue()


def to_json(art: RunArtifact) -> str:
    doc = {
        "tool": "eavesgame",
        "version": art.version,
        "mode": art.mode,
        "target": art.target,
        "config": _json_value(art.config),
        "columns": art.columns,
        "rows": [{c: _json_value(r.get(c)) for c in art.columns} for r in art.rows],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def write_artifact(art: RunArtifact, path: str, fmt: str) -> None:
    text = to_csv(art) if fmt == "csv" else to_json(art)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
