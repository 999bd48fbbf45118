"""CSV tables and SVG figures for an :class:`ExperimentReport`."""
from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import numpy as np
from matplotlib.figure import Figure

from .config import config_to_text
from .experiment import ExperimentReport
from .metrics import TERMINAL_FRACTION

SERIES_COLUMNS = ("policy", "trial", "mean_prob", "mean_cum_regret", "ucb1_bound")
SUMMARY_COLUMNS = (
    "policy", "final_prob", "cr_lo", "cr_hi", "mean_rate", "mean_regret", "rate_cutoff",
)
RUNS_COLUMNS = (
    "policy", "run", "mu_star", "terminal_successes", "terminal_trials", "final_regret",
)
SEEDS_COLUMNS = ("policy", "run", "seed", "env_seed", "nature_seed")

COLORS = {"dig": "C3", "did": "C0", "egreedy": "C2", "ucb1": "C1"}

_SVG_RC = {
    "svg.hashsalt": "delegsim",
    "svg.fonttype": "none",
    "path.simplify": False,
}


class ReportWriteError(OSError):
    pass


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_rows(path: Path, header, rows) -> Path:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(x) for x in row])
    except OSError as exc:
        raise ReportWriteError(f"cannot write {path}: {exc}") from exc
    return path


def _ensure_dir(out_dir) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportWriteError(f"cannot create output directory {out}: {exc}") from exc
    return out


def emit_csv(report: ExperimentReport, out_dir) -> list[Path]:
    """Write series.csv, summary.csv, runs.csv, seeds.csv and config.txt."""
    out = _ensure_dir(out_dir)

    def series_rows():
        for kind, s in report.series.items():
            for t in range(s.mean_prob.size):
                yield (kind.value, t + 1, s.mean_prob[t], s.mean_cum_regret[t],
                       s.ucb1_bound[t])

    def summary_rows():
        for kind, row in report.summary.items():
            yield (kind.value, row.final_prob, row.cr_lo, row.cr_hi, row.mean_rate,
                   row.mean_regret, report.cutoffs[kind])

    def run_rows():
        for kind, runs in report.runs.items():
            for r in runs:
                w = max(1, int(round(TERMINAL_FRACTION * r.outcomes.size)))
                yield (kind.value, r.run, r.mu_star, int(r.outcomes[-w:].sum()), w,
                       r.regret[-1])

    def seed_rows():
        for kind, runs in report.runs.items():
            for r in runs:
                yield (kind.value, r.run, r.seeds["seed"], r.seeds["env_seed"],
                       r.seeds["nature_seed"])

    paths = [
        _write_rows(out / "series.csv", SERIES_COLUMNS, series_rows()),
        _write_rows(out / "summary.csv", SUMMARY_COLUMNS, summary_rows()),
        _write_rows(out / "runs.csv", RUNS_COLUMNS, run_rows()),
        _write_rows(out / "seeds.csv", SEEDS_COLUMNS, seed_rows()),
    ]
    cfg_path = out / "config.txt"
    try:
        cfg_path.write_text(config_to_text(report.config), encoding="utf-8")
    except OSError as exc:
        raise ReportWriteError(f"cannot write {cfg_path}: {exc}") from exc
    paths.append(cfg_path)
    return paths


def bound_curves(report: ExperimentReport) -> list[tuple[str, np.ndarray]]:
    """Distinct UCB1 bound curves; paired environments share one curve."""
    curves: list[tuple[str, np.ndarray]] = []
    for kind, s in report.series.items():
        if not any(np.array_equal(s.ucb1_bound, c) for _, c in curves):
            curves.append((kind.value, s.ucb1_bound))
    return curves


def _save(fig: Figure, path: Path) -> Path:
    try:
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise ReportWriteError(f"cannot write {path}: {exc}") from exc
    return path


def emit_svg(report: ExperimentReport, out_dir) -> list[Path]:
    """Render fig1a.svg (success probability) and fig1b.svg (regret vs bound).

    Each line is tagged with an SVG group id: ``prob-<policy>``,
    ``regret-<policy>`` and ``bound-<policy>``.
    """
    out = _ensure_dir(out_dir)
    paths = []
    with matplotlib.rc_context(_SVG_RC):
        fig = Figure(figsize=(7, 4.5))
        ax = fig.add_subplot()
        for kind, s in report.series.items():
            t = np.arange(1, s.mean_prob.size + 1)
            (line,) = ax.plot(t, s.mean_prob, lw=1, color=COLORS[kind.value],
                              label=kind.label)
            line.set_gid(f"prob-{kind.value}")
        ax.set_xlabel("trial")
        ax.set_ylabel("probability of successful delegation")
        ax.set_ylim(0, 1.02)
        if report.series:
            ax.legend(loc="lower right", frameon=False)
        fig.tight_layout()
        paths.append(_save(fig, out / "fig1a.svg"))

        fig = Figure(figsize=(7, 4.5))
        ax = fig.add_subplot()
        for kind, s in report.series.items():
            t = np.arange(1, s.mean_cum_regret.size + 1)
            (line,) = ax.plot(t, s.mean_cum_regret, lw=1.2,
                              color=COLORS[kind.value], label=kind.label)
            line.set_gid(f"regret-{kind.value}")
        for tag, curve in bound_curves(report):
            t = np.arange(1, curve.size + 1)
            (line,) = ax.plot(t, curve, lw=1, ls="--", color="0.3",
                              label="UCB1 bound")
            line.set_gid(f"bound-{tag}")
        ax.set_xlabel("trial")
        ax.set_ylabel("cumulative regret")
        if report.series:
            ax.legend(loc="upper left", frameon=False)
        fig.tight_layout()
        paths.append(_save(fig, out / "fig1b.svg"))
    return paths


def format_summary(report: ExperimentReport) -> str:
    lines = [f"{'policy':<9} {'final':>6}  {'95% CR':<15} {'rate':>7} {'regret':>9}"]
    for row in report.summary.values():
        lines.append(
            f"{row.policy:<9} {row.final_prob:6.3f}  "
            f"[{row.cr_lo:.3f},{row.cr_hi:.3f}] {row.mean_rate:7.3f} "
            f"{row.mean_regret:9.3f}"
        )
    return "\n".join(lines)
