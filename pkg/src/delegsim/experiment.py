"""Experiment orchestration: configuration, seeding and run aggregation.

Seeds are derived with a named construction so that any implementation
can reproduce the stream layout::

    seed(master, tag, run) = int.from_bytes(
        blake2b(f"{master}:{tag}:{run}".encode(), digest_size=8).digest(), "little")

Each (policy, run) unit uses three independent streams:

* ``env``    network competences; tag ``"env"`` when environments are paired
  across policies, ``"env/<policy>"`` otherwise,
* ``nature`` execution outcomes; tag ``"nature"`` / ``"nature/<policy>"``,
* policy     the policy's own randomisation; tag ``"<policy>"``.
"""
from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import metrics
from .indices import ucb1_bound_curve
from .network import DelegationNetwork, generate_network, sample_competences
from .policies import PolicyKind, make_policy, run_trial

log = logging.getLogger(__name__)

ALL_POLICIES = (PolicyKind.DIG, PolicyKind.DID, PolicyKind.EGREEDY, PolicyKind.UCB1)


class ConfigError(ValueError):
    pass


def derive_seed(master_seed: int, tag: str, run: int) -> int:
    digest = hashlib.blake2b(
        f"{master_seed}:{tag}:{run}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class ExperimentConfig:
    policies: tuple[PolicyKind, ...] = ALL_POLICIES
    runs: int = 100
    trials: int = 1000
    neighbors: int = 5
    depth: int = 4
    epsilon_range: tuple[float, float] = (0.05, 0.1)
    delta_range: tuple[float, float] = (0.8, 1.0)
    master_seed: int = 0
    welch_window: int = 25
    welch_tol: float = 0.005
    output_dir: Path | None = None
    paired: bool = True
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(
            self, "policies", tuple(PolicyKind(p) for p in self.policies)
        )
        if len(set(self.policies)) != len(self.policies):
            raise ConfigError("duplicate policy in configuration")
        for name in ("runs", "trials", "neighbors", "welch_window", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.depth < 0:
            raise ConfigError(f"depth must be >= 0, got {self.depth}")
        if self.welch_tol <= 0:
            raise ConfigError(f"welch_tol must be > 0, got {self.welch_tol}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        lo, hi = self.epsilon_range
        if not 0.05 <= lo <= hi <= 0.1:
            raise ConfigError(
                f"epsilon range ({lo}, {hi}) must lie within [0.05, 0.1]"
            )
        lo, hi = self.delta_range
        if not (0.8 <= lo <= hi <= 1.0) or lo == 1.0:
            raise ConfigError(f"delta range ({lo}, {hi}) must lie within [0.8, 1)")

    def policy_params(self, kind: PolicyKind) -> dict:
        if kind is PolicyKind.EGREEDY:
            return {"epsilon": self.epsilon_range}
        if kind is PolicyKind.DID:
            return {"delta": self.delta_range}
        return {}

    def seeds(self, kind: PolicyKind, run: int) -> dict[str, int]:
        suffix = "" if self.paired else f"/{kind.value}"
        return {
            "seed": derive_seed(self.master_seed, kind.value, run),
            "env_seed": derive_seed(self.master_seed, "env" + suffix, run),
            "nature_seed": derive_seed(self.master_seed, "nature" + suffix, run),
        }


@dataclass
class RunResult:
    policy: PolicyKind
    run: int
    seeds: dict[str, int]
    outcomes: np.ndarray
    chain_lengths: np.ndarray
    mu_star: float
    gaps: np.ndarray

    @property
    def regret(self) -> np.ndarray:
        return metrics.cumulative_regret(self.outcomes, self.mu_star)


def simulate_run(
    kind: PolicyKind,
    network: DelegationNetwork,
    competences,
    trials: int,
    rng: np.random.Generator,
    nature: np.random.Generator,
    **params,
) -> tuple[np.ndarray, np.ndarray]:
    """Play ``trials`` tasks; returns per-trial outcomes and chain lengths."""
    state = make_policy(kind, network, rng, **params)
    outcomes = np.zeros(trials, dtype=np.int8)
    lengths = np.zeros(trials, dtype=np.int16)
    for t in range(trials):
        chain = run_trial(state, network, competences, rng, nature)
        outcomes[t] = chain.outcome
        lengths[t] = len(chain)
    return outcomes, lengths


def execute_run(cfg: ExperimentConfig, kind: PolicyKind, run: int) -> RunResult:
    network = generate_network(cfg.neighbors, cfg.depth)
    seeds = cfg.seeds(kind, run)
    competences = sample_competences(network, np.random.default_rng(seeds["env_seed"]))
    outcomes, lengths = simulate_run(
        kind,
        network,
        competences,
        cfg.trials,
        np.random.default_rng(seeds["seed"]),
        np.random.default_rng(seeds["nature_seed"]),
        **cfg.policy_params(kind),
    )
    return RunResult(
        policy=kind,
        run=run,
        seeds=seeds,
        outcomes=outcomes,
        chain_lengths=lengths,
        mu_star=metrics.mu_star_of(network, competences),
        gaps=metrics.gaps_of(network, competences),
    )


def _execute(args):
    return execute_run(*args)


@dataclass
class PolicySeries:
    mean_prob: np.ndarray
    mean_cum_regret: np.ndarray
    ucb1_bound: np.ndarray


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    series: dict[PolicyKind, PolicySeries]
    summary: dict[PolicyKind, metrics.SummaryRow]
    cutoffs: dict[PolicyKind, int]
    runs: dict[PolicyKind, list[RunResult]] = field(repr=False)

    @property
    def policies(self) -> tuple[PolicyKind, ...]:
        return tuple(self.series)


def aggregate(cfg: ExperimentConfig, runs: list[RunResult]) -> tuple:
    outcomes = np.stack([r.outcomes for r in runs]).astype(float)
    regrets = np.stack([r.regret for r in runs])
    bounds = np.stack([ucb1_bound_curve(r.gaps, cfg.trials) for r in runs])
    mean_prob = outcomes.mean(axis=0)
    series = PolicySeries(mean_prob, regrets.mean(axis=0), bounds.mean(axis=0))
    if cfg.trials > cfg.welch_window:
        cutoff = metrics.welch_cutoff(mean_prob, cfg.welch_window, cfg.welch_tol)
    else:
        cutoff = cfg.trials
    cutoff = min(max(cutoff, 3), max(cfg.trials - 2, 1))
    rate = metrics.safe_rate(mean_prob, cutoff)
    row = metrics.summarize(runs[0].policy.label, outcomes, regrets[:, -1], rate)
    return series, row, cutoff


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Execute every (policy, run) unit and aggregate the ensembles.

    The result depends only on ``cfg``; worker count and scheduling order
    have no influence.
    """
    generate_network(cfg.neighbors, cfg.depth)  # fail fast on infeasible sizes
    units = [(cfg, kind, r) for kind in cfg.policies for r in range(cfg.runs)]
    if cfg.workers > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_execute, units, chunksize=4))
    else:
        results = [_execute(u) for u in units]
    by_policy: dict[PolicyKind, list[RunResult]] = {k: [] for k in cfg.policies}
    for res in results:
        by_policy[res.policy].append(res)
    series, summary, cutoffs = {}, {}, {}
    for kind, runs in by_policy.items():
        runs.sort(key=lambda r: r.run)
        series[kind], summary[kind], cutoffs[kind] = aggregate(cfg, runs)
        log.info("%s: %s", kind.label, summary[kind])
    return ExperimentReport(cfg, series, summary, cutoffs, by_policy)


def with_seed(cfg: ExperimentConfig, master_seed: int) -> ExperimentConfig:
    return replace(cfg, master_seed=master_seed)
