"""Regret, convergence rate, Welch warm-up detection and run summaries."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .network import BeliefState, DelegationNetwork, credible_interval

TERMINAL_FRACTION = 0.1


class InsufficientDataError(ValueError):
    pass


def cumulative_regret(rewards: Sequence[float], mu_star: float) -> np.ndarray:
    """``mu_star * (t + 1) - sum(rewards[:t + 1])`` for every trial t."""
    if not 0.0 <= mu_star <= 1.0:
        raise ValueError(f"mu_star must lie in [0, 1], got {mu_star}")
    r = np.asarray(rewards, dtype=float)
    return mu_star * np.arange(1, r.size + 1) - np.cumsum(r)


def rewards_from_regret(regret: Sequence[float], mu_star: float) -> np.ndarray:
    """Invert :func:`cumulative_regret`."""
    reg = np.asarray(regret, dtype=float)
    total = mu_star * np.arange(1, reg.size + 1) - reg
    return np.diff(total, prepend=0.0)


def error_series(prob: Sequence[float]) -> np.ndarray:
    return np.abs(1.0 - np.asarray(prob, dtype=float))


def convergence_terms(e: Sequence[float], cutoff: int) -> np.ndarray:
    """Per-trial order estimates ``log(e[t+1]/e[t]) / log(e[t]/e[t-1])``.

    Terms touching a zero error, or whose denominator ratio equals one, are
    dropped.
    """
    e = np.asarray(e, dtype=float)
    if cutoff > e.size - 2:
        raise ValueError(f"cutoff {cutoff} needs at least {cutoff + 2} errors")
    prev, cur, nxt = e[0:cutoff], e[1 : cutoff + 1], e[2 : cutoff + 2]
    ok = (prev > 0) & (cur > 0) & (nxt > 0)
    ok &= (cur != prev) & (nxt != cur)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.log(nxt[ok] / cur[ok]) / np.log(cur[ok] / prev[ok])
    return q


def convergence_rate(e: Sequence[float], cutoff: int) -> float:
    """Mean order of convergence of an error series over ``t = 1..cutoff``."""
    q = convergence_terms(e, cutoff)
    if q.size < 3:
        raise InsufficientDataError(
            f"only {q.size} usable terms in the first {cutoff} trials"
        )
    return float(q.mean())


def moving_average(y: Sequence[float], window: int) -> np.ndarray:
    """Centered moving average over ``window`` points, shrunk at the edges."""
    y = np.asarray(y, dtype=float)
    half = (window - 1) // 2
    c = np.concatenate([[0.0], np.cumsum(y)])
    idx = np.arange(y.size)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, y.size)
    return (c[hi] - c[lo]) / (hi - lo)


def welch_cutoff(
    ensemble: Sequence[float], window: int = 25, tol: float = 0.005
) -> int:
    """Warm-up cutoff of an across-run mean series (Welch's procedure).

    The ensemble is smoothed with a centered moving average of ``window``
    points.  Index ``j`` is flat when ``|s[j+window] - s[j]| / |s[j]| < tol``;
    a zero level never counts as flat.  The cutoff is the first index
    followed by ``window`` consecutive flat indices (fewer near the end of
    the series).  Returns ``len(ensemble)`` if no such index exists.
    """
    y = np.asarray(ensemble, dtype=float)
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if window >= y.size:
        raise ValueError(f"window {window} must be shorter than the series ({y.size})")
    s = moving_average(y, window)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(s[window:] - s[:-window]) / np.abs(s[:-window])
    flat = rel < tol
    # run[j]: number of consecutive flat indices starting at j
    run = np.zeros(flat.size + 1, dtype=int)
    for j in range(flat.size - 1, -1, -1):
        run[j] = run[j + 1] + 1 if flat[j] else 0
    need = np.minimum(window, flat.size - np.arange(flat.size))
    hits = np.flatnonzero(run[:-1] >= need)
    return int(hits[0]) if hits.size else int(y.size)


def mu_star_of(network: DelegationNetwork, competences: Sequence[float]) -> float:
    """Best competence among agents reachable from the root."""
    best = competences[0]
    stack = [0]
    while stack:
        j = stack.pop()
        best = max(best, competences[j])
        stack.extend(network.neighbors[j])
    return float(best)


def gaps_of(network: DelegationNetwork, competences: Sequence[float]) -> np.ndarray:
    """Gap of every reachable agent to the best one (the arms of the bound)."""
    theta = np.asarray(competences, dtype=float)
    mu_star = mu_star_of(network, theta)
    return mu_star - theta


@dataclass(frozen=True)
class SummaryRow:
    policy: str
    final_prob: float
    cr_lo: float
    cr_hi: float
    mean_rate: float
    mean_regret: float


def terminal_posterior(
    outcomes: np.ndarray, fraction: float = TERMINAL_FRACTION
) -> BeliefState:
    """Beta(1, 1) updated with every outcome in the last ``fraction`` of trials."""
    outcomes = np.atleast_2d(np.asarray(outcomes))
    T = outcomes.shape[1]
    w = max(1, int(round(fraction * T)))
    tail = outcomes[:, T - w :]
    s = int(np.count_nonzero(tail))
    return BeliefState(1.0 + s, 1.0 + tail.size - s)


def summarize(
    policy: str,
    outcomes: np.ndarray,
    regrets: Sequence[float],
    rate: float,
    level: float = 0.95,
) -> SummaryRow:
    """Table row for one policy.

    ``outcomes`` is the runs x trials success matrix, ``regrets`` the terminal
    cumulative regret of each run, ``rate`` the ensemble convergence rate.
    """
    post = terminal_posterior(outcomes)
    lo, hi = credible_interval(post, level)
    return SummaryRow(
        policy=policy,
        final_prob=post.mean,
        cr_lo=lo,
        cr_hi=hi,
        mean_rate=rate,
        mean_regret=float(np.mean(regrets)),
    )


def safe_rate(prob: Sequence[float], cutoff: int) -> float:
    """Convergence rate of an ensemble probability series, NaN when undefined."""
    e = error_series(prob)
    cutoff = min(cutoff, e.size - 2)
    try:
        return convergence_rate(e, cutoff)
    except (InsufficientDataError, ValueError):
        return math.nan
