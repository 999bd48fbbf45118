"""Command line entry point: ``delegsim run | validate | oracle``."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import KEYS, build_config, parse_algos, read_config_file
from .experiment import ConfigError, ExperimentConfig, run_experiment
from .report import ReportWriteError, emit_csv, emit_svg, format_summary
from .validate import ORACLE_DELTAS, ORACLE_TOL, oracle_table, run_checks


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _non_negative(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="delegsim", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run the comparative experiment")
    run.add_argument("--algo", action="append", metavar="NAME",
                     help="dig|did|ucb1|egreedy|all (repeatable, comma lists ok)")
    run.add_argument("--runs", type=_positive)
    run.add_argument("--trials", type=_positive)
    run.add_argument("--neighbors", type=_positive)
    run.add_argument("--depth", type=_non_negative)
    run.add_argument("--seed", type=_non_negative)
    run.add_argument("--epsilon-lo", type=float)
    run.add_argument("--epsilon-hi", type=float)
    run.add_argument("--delta-lo", type=float)
    run.add_argument("--delta-hi", type=float)
    run.add_argument("--welch-window", type=_positive)
    run.add_argument("--welch-tol", type=float)
    run.add_argument("--decoupled", action="store_true", default=None,
                     help="give every policy its own environments")
    run.add_argument("--workers", type=_positive, help="parallel processes")
    run.add_argument("--out", help="output directory")
    run.add_argument("--config", help="key=value file; flags override it")

    val = sub.add_parser("validate", help="run the invariant self-checks")
    val.add_argument("--trials", type=_positive, default=20000)
    val.add_argument("--seed", type=_non_negative, default=0)
    val.add_argument("--oracle", action="store_true",
                     help="include the exact-vs-approximate Gittins sweep")

    orc = sub.add_parser("oracle", help="print exact vs approximate Gittins indices")
    orc.add_argument("--max-count", type=_positive, default=10)
    orc.add_argument("--delta", type=float, action="append")
    return p


def parse_cli(argv=None) -> ExperimentConfig:
    """Parse ``run`` arguments into a validated configuration.

    Raises :class:`ConfigError` for invalid values and ``SystemExit`` for
    malformed command lines.
    """
    args = build_parser().parse_args(argv)
    if args.command != "run":
        raise ConfigError(f"'{args.command}' does not build an experiment config")
    return _run_config(args)


def _run_config(args) -> ExperimentConfig:
    values = read_config_file(args.config) if args.config else {}
    for key in KEYS:
        v = getattr(args, key, None)
        if v is None:
            continue
        values[key] = parse_algos(",".join(v).split(",")) if key == "algo" else v
    if values.get("out") is None:
        raise ConfigError("missing output directory: pass --out DIR or set out= in --config")
    return build_config(values)


def _cmd_run(args) -> int:
    cfg = _run_config(args)
    report = run_experiment(cfg)
    paths = emit_csv(report, cfg.output_dir) + emit_svg(report, cfg.output_dir)
    print(format_summary(report))
    for path in paths:
        print(f"wrote {path}")
    return 0


def _cmd_validate(args) -> int:
    checks = run_checks(args.trials, args.seed, oracle=args.oracle)
    for c in checks:
        print(c.line())
    return 0 if all(c.ok for c in checks) else 1


def _cmd_oracle(args) -> int:
    deltas = tuple(args.delta) if args.delta else ORACLE_DELTAS
    rows = oracle_table(range(1, args.max_count + 1), deltas)
    print(f"{'alpha':>5} {'beta':>5} {'delta':>6} {'exact':>8} {'approx':>8} {'error':>8}")
    for r in rows:
        flag = "  *" if r.error > ORACLE_TOL else ""
        print(f"{r.alpha:5d} {r.beta:5d} {r.delta:6.3f} {r.exact:8.4f} "
              f"{r.approx:8.4f} {r.error:8.4f}{flag}")
    n_bad = sum(r.error > ORACLE_TOL for r in rows)
    print(f"# {n_bad} of {len(rows)} cells exceed {ORACLE_TOL} (marked *)")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    handler = {"run": _cmd_run, "validate": _cmd_validate, "oracle": _cmd_oracle}
    try:
        return handler[args.command](args)
    except (ConfigError, ReportWriteError, ValueError) as exc:
        print(f"delegsim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
