"""Agent networks, the task environment and Beta-Bernoulli bookkeeping.

Agents are dense integer ids with 0 as the root (the agent that originates
every task).  A generated network is a complete K-ary tree laid out in
breadth-first order, so the children of agent ``i`` are
``K*i + 1 .. K*i + K``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import special

MAX_AGENTS = 10**6


class InfeasibleNetworkError(ValueError):
    """Raised when a requested network would exceed the agent cap."""


@dataclass(frozen=True)
class DelegationNetwork:
    """Rooted, depth-limited delegation tree."""

    neighbors: tuple[tuple[int, ...], ...]
    depth: tuple[int, ...]
    branching: int
    max_depth: int
    parent: tuple[int, ...] = field(repr=False, default=())

    @property
    def num_agents(self) -> int:
        return len(self.neighbors)

    @property
    def agents(self) -> range:
        return range(self.num_agents)

    def edges(self) -> list[tuple[int, int]]:
        return [(j, k) for j, nbrs in enumerate(self.neighbors) for k in nbrs]

    def check(self) -> None:
        """Validate the tree invariants; raises ``ValueError`` on violation."""
        n = self.num_agents
        if len(self.depth) != n:
            raise ValueError("depth table does not cover every agent")
        indegree = [0] * n
        for j, nbrs in enumerate(self.neighbors):
            if self.depth[j] < self.max_depth and len(nbrs) != self.branching:
                raise ValueError(
                    f"agent {j} at depth {self.depth[j]} has {len(nbrs)} "
                    f"neighbors, expected {self.branching}"
                )
            if self.depth[j] >= self.max_depth and nbrs:
                raise ValueError(f"agent {j} at max depth has neighbors")
            for k in nbrs:
                indegree[k] += 1
                if self.depth[k] != self.depth[j] + 1:
                    raise ValueError(f"edge {j}->{k} skips a level")
        if indegree[0] != 0 or any(d != 1 for d in indegree[1:]):
            raise ValueError("network is not a rooted tree")


def tree_size(branching: int, max_depth: int) -> int:
    return sum(branching**level for level in range(max_depth + 1))


def generate_network(
    branching: int, max_depth: int, *, max_agents: int = MAX_AGENTS
) -> DelegationNetwork:
    """Build the complete ``branching``-ary tree of depth ``max_depth``."""
    if branching < 1:
        raise ValueError(f"branching must be >= 1, got {branching}")
    if max_depth < 0:
        raise ValueError(f"max_depth must be >= 0, got {max_depth}")
    n = tree_size(branching, max_depth)
    if n > max_agents:
        raise InfeasibleNetworkError(
            f"K={branching}, D={max_depth} gives {n} agents (cap {max_agents})"
        )
    depth = [0] * n
    parent = [-1] * n
    neighbors: list[tuple[int, ...]] = []
    for j in range(n):
        if depth[j] < max_depth:
            first = branching * j + 1
            kids = tuple(range(first, first + branching))
            for k in kids:
                depth[k] = depth[j] + 1
                parent[k] = j
        else:
            kids = ()
        neighbors.append(kids)
    return DelegationNetwork(
        neighbors=tuple(neighbors),
        depth=tuple(depth),
        branching=branching,
        max_depth=max_depth,
        parent=tuple(parent),
    )


def sample_competences(
    network: DelegationNetwork, rng: np.random.Generator
) -> np.ndarray:
    """Draw every agent's true success probability i.i.d. Uniform(0, 1)."""
    return rng.random(network.num_agents)


def execute_task(theta: float, rng: np.random.Generator) -> bool:
    return bool(rng.random() < theta)


@dataclass(frozen=True)
class BeliefState:
    """Beta(alpha, beta) pseudo-counts; Beta(1, 1) is the uninformative floor."""

    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.alpha < 1.0 or self.beta < 1.0:
            raise ValueError(
                f"pseudo-counts must be >= 1, got ({self.alpha}, {self.beta})"
            )

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    @property
    def count(self) -> float:
        return self.alpha + self.beta


def update_belief(b: BeliefState, success: bool) -> BeliefState:
    if success:
        return BeliefState(b.alpha + 1.0, b.beta)
    return BeliefState(b.alpha, b.beta + 1.0)


def update_many(b: BeliefState, outcomes: Iterable[bool]) -> BeliefState:
    s = f = 0
    for ok in outcomes:
        if ok:
            s += 1
        else:
            f += 1
    return BeliefState(b.alpha + s, b.beta + f)


def credible_interval(b: BeliefState, level: float = 0.95) -> tuple[float, float]:
    """Equal-tailed Beta quantile interval holding ``level`` posterior mass."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    tail = (1.0 - level) / 2.0
    lo, hi = special.betaincinv(b.alpha, b.beta, [tail, 1.0 - tail])
    return float(lo), float(hi)


@dataclass(frozen=True)
class DelegationChain:
    """Path a task took from the root to whoever executed it."""

    path: tuple[int, ...]
    outcome: bool

    @property
    def executor(self) -> int:
        return self.path[-1]

    def __len__(self) -> int:
        return len(self.path)


def is_valid_chain(chain: DelegationChain, network: DelegationNetwork) -> bool:
    path: Sequence[int] = chain.path
    if not path or path[0] != 0 or len(path) > network.max_depth + 1:
        return False
    return all(k in network.neighbors[j] for j, k in zip(path, path[1:]))
