"""Recursive task delegation over agent networks.

Simulates four delegation policies (UCB1, Gittins-indexed DID,
epsilon-greedy and the quitting-game DIG) on K-ary delegation trees and
reports success probability, regret and convergence-rate metrics.
"""
from .experiment import ExperimentConfig, ExperimentReport, run_experiment
from .indices import (
    DiscountParams,
    GapProfile,
    exact_gittins_bernoulli,
    gittins_approx,
    psi,
    ucb1_regret_bound,
    ucb1_score,
)
from .network import (
    BeliefState,
    DelegationChain,
    DelegationNetwork,
    credible_interval,
    execute_task,
    generate_network,
    sample_competences,
    update_belief,
)
from .policies import (
    PolicyKind,
    RewardTriple,
    bandit_init,
    bandit_trial,
    dig_init,
    dig_trial,
    mixed_strategy,
)

__all__ = [
    "BeliefState",
    "DelegationChain",
    "DelegationNetwork",
    "DiscountParams",
    "ExperimentConfig",
    "ExperimentReport",
    "GapProfile",
    "PolicyKind",
    "RewardTriple",
    "bandit_init",
    "bandit_trial",
    "credible_interval",
    "dig_init",
    "dig_trial",
    "exact_gittins_bernoulli",
    "execute_task",
    "generate_network",
    "gittins_approx",
    "mixed_strategy",
    "psi",
    "run_experiment",
    "sample_competences",
    "ucb1_regret_bound",
    "ucb1_score",
    "update_belief",
]
