"""Self-checks behind ``delegsim validate`` and the ``oracle`` table."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .experiment import ALL_POLICIES, ExperimentConfig, run_experiment
from .indices import (
    DiscountParams,
    exact_gittins_bernoulli,
    gittins_approx,
    psi,
    psi_boundary_jumps,
)
from .network import (
    BeliefState,
    credible_interval,
    generate_network,
    sample_competences,
    update_belief,
)
from .policies import RewardTriple, make_policy, mixed_strategy, run_trial

ORACLE_TOL = 0.07
ORACLE_DELTAS = (0.8, 0.9, 0.95)


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.ok else 'FAIL'}] {self.name}" + (
            f"  ({self.detail})" if self.detail else ""
        )


@dataclass(frozen=True)
class OracleRow:
    alpha: int
    beta: int
    delta: float
    exact: float
    approx: float

    @property
    def error(self) -> float:
        return abs(self.approx - self.exact)


def oracle_table(
    counts=range(1, 11), deltas=ORACLE_DELTAS
) -> list[OracleRow]:
    rows = []
    for delta in deltas:
        d = DiscountParams(delta)
        for a in counts:
            for b in counts:
                bel = BeliefState(a, b)
                rows.append(
                    OracleRow(a, b, delta, exact_gittins_bernoulli(bel, d),
                              gittins_approx(bel, d))
                )
    return rows


def _check_psi() -> Check:
    got = (psi(0.125), psi(3.16374), psi(100.0))
    want = (0.25, 0.483825, 1.94058)
    ok = all(abs(g - w) < 5e-6 for g, w in zip(got, want))
    psi_boundary_jumps()
    return Check("psi branch values", ok, ", ".join(f"{g:.6f}" for g in got))


def _check_beta() -> Check:
    b = BeliefState()
    for _ in range(9):
        b = update_belief(b, True)
    b = update_belief(b, False)
    lo, hi = credible_interval(BeliefState(2, 1), 0.95)
    ok = (b == BeliefState(10, 2)
          and abs(lo - math.sqrt(0.025)) < 1e-9
          and abs(hi - math.sqrt(0.975)) < 1e-9)
    return Check("Beta conjugacy and credible interval", ok,
                 f"Beta(2,1) 95% = [{lo:.4f}, {hi:.4f}]")


def _check_mixed_strategy() -> Check:
    got = (
        mixed_strategy(RewardTriple(0, 0.6, 1.0), RewardTriple(0.2, 0, 0)),
        mixed_strategy(RewardTriple(0, 0.1, 1.0), RewardTriple(0.2, 0, 0)),
        mixed_strategy(RewardTriple(0, 0.5, 0.2), RewardTriple(0.2, 0, 0)),
    )
    ok = abs(got[0] - 0.5) < 1e-12 and got[1:] == (0.0, 0.0)
    return Check("mixed strategy clamping", ok, ", ".join(f"{x:.6g}" for x in got))


def _check_chain_lengths(trials: int, seed: int) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0
    count = 0
    per = max(1, trials // 40)
    while count < trials:
        k, d = int(rng.integers(1, 5)), int(rng.integers(0, 5))
        net = generate_network(k, d)
        comp = sample_competences(net, rng)
        for kind in ALL_POLICIES:
            state = make_policy(kind, net, rng)
            for _ in range(per):
                chain = run_trial(state, net, comp, rng)
                worst = max(worst, len(chain) - d - 1)
            count += per
    return Check("chain length <= D+1", worst <= 0, f"{count} trials")


def _check_replay(seed: int) -> Check:
    cfg = ExperimentConfig(runs=2, trials=50, neighbors=3, depth=2, master_seed=seed)
    a, b = run_experiment(cfg), run_experiment(cfg)
    ok = all(
        np.array_equal(ra.outcomes, rb.outcomes)
        for k in cfg.policies
        for ra, rb in zip(a.runs[k], b.runs[k])
    )
    return Check("byte-identical replay", ok)


def _check_degenerate(seed: int) -> Check:
    cfg = ExperimentConfig(runs=3, trials=40, neighbors=1, depth=0, master_seed=seed)
    rep = run_experiment(cfg)
    first = rep.series[cfg.policies[0]].mean_prob
    ok = all(np.array_equal(s.mean_prob, first) for s in rep.series.values())
    return Check("single-agent network: identical series", ok)


def _check_oracle() -> Check:
    rows = oracle_table()
    bad = [r for r in rows if r.error > ORACLE_TOL]
    worst = max(r.error for r in rows)
    detail = f"max error {worst:.4f}"
    if bad:
        detail += "; over tolerance: " + ", ".join(
            f"Beta({r.alpha},{r.beta}) d={r.delta}: {r.error:.4f}" for r in bad
        )
    return Check(f"closed-form vs exact Gittins within {ORACLE_TOL}", not bad, detail)


def run_checks(trials: int = 20000, seed: int = 0, oracle: bool = False) -> list[Check]:
    checks: list[Callable[[], Check]] = [
        _check_psi,
        _check_beta,
        _check_mixed_strategy,
        lambda: _check_chain_lengths(trials, seed),
        lambda: _check_replay(seed),
        lambda: _check_degenerate(seed),
    ]
    if oracle:
        checks.append(_check_oracle)
    return [c() for c in checks]
