"""Index and bound numerics for Bernoulli arms with Beta posteriors.

Contains the closed-form Gittins index approximation (Brezzi & Lai, 2002)
with its continuation-boundary function ``psi``, the UCB1 score and the
UCB1 finite-time regret bound (Auer et al., 2002), and an exact Gittins
index computed by retirement-value calibration, used as a validation
oracle for the closed form.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .network import BeliefState

log = logging.getLogger(__name__)

LOG_16PI = math.log(16.0 * math.pi)
PSI_BREAKS = (0.2, 1.0, 5.0, 15.0)


@dataclass(frozen=True)
class DiscountParams:
    delta: float

    def __post_init__(self):
        if not 0.8 <= self.delta < 1.0:
            raise ValueError(f"discount must lie in [0.8, 1), got {self.delta}")

    @property
    def c(self) -> float:
        return -math.log(self.delta)

    @classmethod
    def from_rate(cls, c: float) -> "DiscountParams":
        return cls(math.exp(-c))


@dataclass(frozen=True)
class GapProfile:
    mu_star: float
    gaps: tuple[float, ...]

    @classmethod
    def from_means(cls, means: Sequence[float]) -> "GapProfile":
        mu_star = max(means)
        return cls(mu_star, tuple(mu_star - m for m in means))


def psi(tau: float) -> float:
    """Approximate boundary of the continuation region, piecewise in ``tau``."""
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if tau <= 0.2:
        return math.sqrt(tau / 2.0)
    if tau <= 1.0:
        return 0.49 - 0.11 / math.sqrt(tau)
    if tau <= 5.0:
        return 0.63 - 0.26 / math.sqrt(tau)
    if tau <= 15.0:
        return 0.77 - 0.58 / math.sqrt(tau)
    lt = math.log(tau)
    return math.sqrt(2.0 * lt - math.log(lt) - LOG_16PI)


def psi_boundary_jumps() -> dict[float, float]:
    """Size of the jump ``psi(b+) - psi(b)`` at each branch boundary."""
    eps = 1e-12
    jumps = {b: psi(b + eps) - psi(b) for b in PSI_BREAKS}
    log.warning(
        "psi branch-boundary jumps: %s",
        ", ".join(f"tau={b:g}: {j:+.4f}" for b, j in jumps.items()),
    )
    return jumps


def gittins_tau(n: float, c: float) -> float:
    return 1.0 / ((n + 1.0) * c)


def gittins_approx(b: BeliefState, d: DiscountParams) -> float:
    """Closed-form Gittins index of a Beta(alpha, beta) Bernoulli arm."""
    return _gittins_approx(b.alpha, b.beta, d.c)


def _gittins_approx(alpha: float, beta: float, c: float) -> float:
    n = alpha + beta
    mu = alpha / n
    return mu + math.sqrt(mu * (1.0 - mu) / (n + 1.0)) * psi(1.0 / ((n + 1.0) * c))


def ucb1_score(b: BeliefState, total_trials: int) -> float:
    return _ucb1_score(b.alpha, b.beta, math.log(total_trials))


def _ucb1_score(alpha: float, beta: float, log_t: float) -> float:
    n = alpha + beta
    return alpha / n + math.sqrt(2.0 * log_t / n)


def ucb1_regret_bound(g: GapProfile | Sequence[float], T: int) -> float:
    """UCB1 upper bound on expected regret after ``T`` pulls.

    ``8 * sum(log T / gap)`` over strictly suboptimal arms plus
    ``(1 + pi^2/3) * sum(gap)`` over all arms.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    gaps = g.gaps if isinstance(g, GapProfile) else tuple(g)
    if any(x < 0 for x in gaps):
        raise ValueError("gaps must be non-negative")
    log_t = math.log(T)
    inv = sum(1.0 / x for x in gaps if x > 0)
    return 8.0 * log_t * inv + (1.0 + math.pi**2 / 3.0) * sum(gaps)


def ucb1_bound_curve(gaps: Sequence[float], T: int) -> np.ndarray:
    """``ucb1_regret_bound(gaps, t)`` for t = 1..T as one array."""
    gaps = np.asarray(gaps, dtype=float)
    pos = gaps[gaps > 0]
    inv = float(np.sum(1.0 / pos)) if pos.size else 0.0
    lin = (1.0 + math.pi**2 / 3.0) * float(gaps.sum())
    return 8.0 * np.log(np.arange(1, T + 1)) * inv + lin


def default_horizon(delta: float, eps: float = 1e-9) -> int:
    return int(math.ceil(math.log(eps) / math.log(delta)))


def _continuation_value(
    alpha: float, beta: float, delta: float, horizon: int, lam: float
) -> float:
    """Value of pulling once from (alpha, beta), retirement reward ``lam``/step.

    Backward induction over the lattice of reachable posteriors.  Beyond
    ``horizon`` pulls the arm is valued as if its posterior mean were known.
    """
    retire = lam / (1.0 - delta)
    s = np.arange(horizon + 1, dtype=float)
    mu = (alpha + s) / (alpha + beta + horizon)
    v = np.maximum(retire, mu / (1.0 - delta))
    for k in range(horizon - 1, -1, -1):
        s = s[: k + 1]
        mu = (alpha + s) / (alpha + beta + k)
        q = mu + delta * (mu * v[1 : k + 2] + (1.0 - mu) * v[: k + 1])
        if k == 0:
            return float(q[0])
        v = np.maximum(retire, q)
    raise AssertionError("unreachable")


def exact_gittins_bernoulli(
    b: BeliefState,
    d: DiscountParams,
    horizon: int | None = None,
    tol: float = 1e-5,
) -> float:
    """Gittins index of a Beta-Bernoulli arm by bisection on the retirement value.

    The index is the per-step retirement reward at which pulling once and
    then acting optimally is exactly as good as retiring immediately.
    """
    if horizon is None:
        horizon = default_horizon(d.delta)
    if d.delta**horizon >= 1e-6:
        raise ValueError(
            f"horizon {horizon} too short for delta={d.delta} "
            f"(delta**horizon = {d.delta**horizon:.2e})"
        )
    lo, hi = 0.0, 1.0
    for _ in range(64):
        if hi - lo <= tol:
            break
        lam = 0.5 * (lo + hi)
        if _continuation_value(b.alpha, b.beta, d.delta, horizon, lam) > lam / (
            1.0 - d.delta
        ):
            lo = lam
        else:
            hi = lam
    assert hi - lo <= tol, "calibration bisection did not converge"
    return 0.5 * (lo + hi)
