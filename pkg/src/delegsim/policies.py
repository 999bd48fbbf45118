"""Delegation policies: UCB1, Gittins-indexed (DID), epsilon-greedy and the
quitting-game Delegation Game (DIG).

Every policy walks the task down the tree from the root.  The bandit
policies delegate at every level until the depth limit forces execution;
DIG lets each holder quit (execute) or delegate according to mixed
strategies derived from sampled quitting-game payoffs.

Policy state is owned by one run and updated in place.  Competences are
only read when the executor performs the task; the selection logic never
sees them.  Beliefs are stored per directed edge; in a tree each edge is
identified by its head agent, so edge ``(parent(k), k)`` lives at index
``k`` of the pseudo-count arrays.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .indices import DiscountParams, _gittins_approx, _ucb1_score
from .network import BeliefState, DelegationChain, DelegationNetwork

DEN_EPS = 1e-9
STRATEGY_PRIOR_WEIGHT = 2.0


class PolicyKind(str, enum.Enum):
    UCB1 = "ucb1"
    DID = "did"
    EGREEDY = "egreedy"
    DIG = "dig"

    @property
    def label(self) -> str:
        return {"ucb1": "UCB1", "did": "DID", "egreedy": "e-Greedy", "dig": "DIG"}[
            self.value
        ]


BANDIT_KINDS = (PolicyKind.UCB1, PolicyKind.DID, PolicyKind.EGREEDY)


class MalformedNetworkError(RuntimeError):
    pass


def argmax_lowest(scores: Sequence[float]) -> int:
    """Position of the maximum score; ties go to the earliest position."""
    best = 0
    top = scores[0]
    for i in range(1, len(scores)):
        if scores[i] > top:
            best, top = i, scores[i]
    return best


class _EdgeBeliefs:
    """Beta pseudo-counts for every tree edge plus each agent's own record."""

    def __init__(self, num_agents: int):
        self.alpha = [1.0] * num_agents
        self.beta = [1.0] * num_agents
        self.own_alpha = [1.0] * num_agents
        self.own_beta = [1.0] * num_agents

    def belief(self, j: int, k: int, network: DelegationNetwork) -> BeliefState:
        if k not in network.neighbors[j]:
            raise KeyError(f"({j}, {k}) is not an edge")
        return BeliefState(self.alpha[k], self.beta[k])

    def record(self, path: Sequence[int], success: bool) -> None:
        edge = self.alpha if success else self.beta
        for k in path[1:]:
            edge[k] += 1.0
        own = self.own_alpha if success else self.own_beta
        own[path[-1]] += 1.0

    def traversals(self) -> float:
        return sum(self.alpha) + sum(self.beta) - 2.0 * len(self.alpha) - (
            self.alpha[0] + self.beta[0] - 2.0
        )


@dataclass
class BanditPolicyState(_EdgeBeliefs):
    kind: PolicyKind
    num_agents: int
    epsilon: list[float] = field(default_factory=list)
    delta: list[float] = field(default_factory=list)
    trial_counter: int = 0
    decisions: int = 0
    explorations: int = 0

    def __post_init__(self):
        _EdgeBeliefs.__init__(self, self.num_agents)
        self._c = [-math.log(d) for d in self.delta]

    def discount(self, j: int) -> DiscountParams:
        return DiscountParams(self.delta[j])


def bandit_init(
    kind: PolicyKind,
    network: DelegationNetwork,
    rng: np.random.Generator | None = None,
    *,
    epsilon: float | tuple[float, float] = (0.05, 0.1),
    delta: float | tuple[float, float] = 0.9,
) -> BanditPolicyState:
    """Fresh state for a bandit policy.

    ``epsilon`` and ``delta`` are either fixed values or ``(lo, hi)`` ranges
    from which each agent draws its own parameter uniformly.
    """
    kind = PolicyKind(kind)
    if kind is PolicyKind.DIG:
        raise ValueError("DIG uses dig_init")
    n = network.num_agents
    eps: list[float] = []
    dlt: list[float] = []
    if kind is PolicyKind.EGREEDY:
        eps = _per_agent(epsilon, n, rng, "epsilon")
        if not all(0.0 <= e <= 1.0 for e in eps):
            raise ValueError("epsilon must lie in [0, 1]")
    if kind is PolicyKind.DID:
        dlt = _per_agent(delta, n, rng, "delta")
        for d in dlt:
            DiscountParams(d)
    return BanditPolicyState(kind=kind, num_agents=n, epsilon=eps, delta=dlt)


def _per_agent(value, n, rng, name) -> list[float]:
    if isinstance(value, (tuple, list)):
        lo, hi = value
        if lo == hi:
            return [float(lo)] * n
        if rng is None:
            raise ValueError(f"a {name} range needs an rng")
        return (lo + (hi - lo) * rng.random(n)).tolist()
    return [float(value)] * n


def bandit_select(
    state: BanditPolicyState, j: int, nbrs: Sequence[int], rng: np.random.Generator
) -> int:
    """Neighbor of holder ``j`` that receives the task."""
    a, b = state.alpha, state.beta
    kind = state.kind
    state.decisions += 1
    if kind is PolicyKind.UCB1:
        log_t = math.log(state.trial_counter + 1)
        scores = [_ucb1_score(a[k], b[k], log_t) for k in nbrs]
    elif kind is PolicyKind.DID:
        c = state._c[j]
        scores = [_gittins_approx(a[k], b[k], c) for k in nbrs]
    else:
        if rng.random() < state.epsilon[j]:
            state.explorations += 1
            return nbrs[int(rng.integers(len(nbrs)))]
        scores = [a[k] / (a[k] + b[k]) for k in nbrs]
    return nbrs[argmax_lowest(scores)]


def bandit_trial(
    state: BanditPolicyState,
    network: DelegationNetwork,
    competences: Sequence[float],
    rng: np.random.Generator,
    nature: np.random.Generator | None = None,
) -> tuple[DelegationChain, BanditPolicyState]:
    """Run one task through the network under a bandit policy.

    ``rng`` drives the policy's own randomisation, ``nature`` the execution
    outcome (defaults to ``rng``).
    """
    nature = rng if nature is None else nature
    holder = 0
    path = [0]
    neighbors = network.neighbors
    max_depth = network.max_depth
    for level in range(max_depth):
        nbrs = neighbors[holder]
        if not nbrs:
            raise MalformedNetworkError(
                f"agent {holder} at depth {level} < {max_depth} has no neighbors"
            )
        holder = bandit_select(state, holder, nbrs, rng)
        path.append(holder)
    success = bool(nature.random() < competences[holder])
    state.record(path, success)
    state.trial_counter += 1
    return DelegationChain(tuple(path), success), state


# -- Delegation game ---------------------------------------------------------


@dataclass(frozen=True)
class RewardTriple:
    r0: float
    r1: float
    r2: float

    def __post_init__(self):
        for r in (self.r0, self.r1, self.r2):
            if not 0.0 <= r <= 1.0:
                raise ValueError(f"reward components must lie in [0, 1]: {self}")


def raw_mixed_strategy(rj: RewardTriple, rk: RewardTriple) -> float | None:
    den = rj.r2 - rk.r0
    if abs(den) < DEN_EPS:
        return None
    return (rj.r1 - rk.r0) / den


def mixed_strategy(rj: RewardTriple, rk: RewardTriple) -> float:
    """Probability that ``j`` delegates to ``k``, clamped to [0, 1]."""
    x = raw_mixed_strategy(rj, rk)
    if x is None:
        return 0.0
    return min(1.0, max(0.0, x))


@dataclass
class DigState(_EdgeBeliefs):
    num_agents: int
    rewards: list[RewardTriple] = field(default_factory=list)
    strategy: list[float] = field(default_factory=list)
    visited: list[set[int]] = field(default_factory=list)
    trial_counter: int = 0
    quits: int = 0
    refreshes: int = 0
    prior_weight: float = STRATEGY_PRIOR_WEIGHT

    def __post_init__(self):
        _EdgeBeliefs.__init__(self, self.num_agents)

    def strategies(self, network: DelegationNetwork) -> dict[tuple[int, int], float]:
        return {(j, k): self.strategy[k] for j, k in network.edges()}

    def delegate_prob(self, k: int) -> float:
        """Edge posterior mean with the game strategy as a weak prior."""
        w = self.prior_weight
        a, b = self.alpha[k], self.beta[k]
        return (a + w * self.strategy[k]) / (a + b + w)


def _sample_triple(rng: np.random.Generator) -> RewardTriple:
    r0, r1, r2 = rng.random(3)
    return RewardTriple(float(r0), float(r1), float(r2))


def dig_init(
    network: DelegationNetwork,
    rng: np.random.Generator,
    *,
    prior_weight: float = STRATEGY_PRIOR_WEIGHT,
) -> DigState:
    n = network.num_agents
    state = DigState(num_agents=n, prior_weight=prior_weight)
    state.rewards = [_sample_triple(rng) for _ in range(n)]
    state.strategy = [0.0] * n
    for j, k in network.edges():
        state.strategy[k] = mixed_strategy(state.rewards[j], state.rewards[k])
    state.visited = [set() for _ in range(n)]
    return state


def _refresh(state: DigState, network: DelegationNetwork, j: int, m: int,
             rng: np.random.Generator) -> None:
    """Redraw ``m``'s payoffs and recompute the strategies that depend on them."""
    state.refreshes += 1
    rm = state.rewards[m] = _sample_triple(rng)
    state.strategy[m] = mixed_strategy(state.rewards[j], rm)
    for k in network.neighbors[m]:
        state.strategy[k] = mixed_strategy(rm, state.rewards[k])


def dig_trial(
    state: DigState,
    network: DelegationNetwork,
    competences: Sequence[float],
    rng: np.random.Generator,
    nature: np.random.Generator | None = None,
) -> tuple[DelegationChain, DigState]:
    """Play one delegation game from the root until someone executes."""
    nature = rng if nature is None else nature
    holder = 0
    path = [0]
    budget = network.max_depth
    rewards, visited = state.rewards, state.visited
    a, b = state.alpha, state.beta
    while budget > 0:
        nbrs = network.neighbors[holder]
        if not nbrs:
            raise MalformedNetworkError(f"agent {holder} has budget but no neighbors")
        m = nbrs[argmax_lowest([a[k] / (a[k] + b[k]) * rewards[k].r1 for k in nbrs])]
        if not rng.random() < state.delegate_prob(m):
            # the holder quits and executes the task itself
            state.quits += 1
            visited[holder].clear()
            break
        path.append(m)
        if m in visited[holder]:
            _refresh(state, network, holder, m, rng)
            holder = m
            break
        visited[holder].add(m)
        holder = m
        r = rewards[m]
        if r.r0 <= r.r1:
            break
        budget -= 1
    success = bool(nature.random() < competences[holder])
    state.record(path, success)
    state.trial_counter += 1
    return DelegationChain(tuple(path), success), state


def make_policy(kind, network, rng, **params):
    kind = PolicyKind(kind)
    if kind is PolicyKind.DIG:
        return dig_init(network, rng)
    return bandit_init(kind, network, rng, **params)


def run_trial(state, network, competences, rng, nature=None) -> DelegationChain:
    if isinstance(state, DigState):
        return dig_trial(state, network, competences, rng, nature)[0]
    return bandit_trial(state, network, competences, rng, nature)[0]
