"""Flat ``key=value`` configuration files.

One assignment per line, ``#`` starts a comment, unknown keys are errors.
Keys mirror the ``run`` flags with dashes replaced by underscores.
"""
from __future__ import annotations

from pathlib import Path
from typing import Mapping

from .experiment import ALL_POLICIES, ConfigError, ExperimentConfig
from .policies import PolicyKind

KEYS = {
    "algo": str,
    "runs": int,
    "trials": int,
    "neighbors": int,
    "depth": int,
    "seed": int,
    "epsilon_lo": float,
    "epsilon_hi": float,
    "delta_lo": float,
    "delta_hi": float,
    "welch_window": int,
    "welch_tol": float,
    "out": str,
    "decoupled": bool,
    "workers": int,
}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_value(key: str, text: str):
    kind = KEYS[key]
    if kind is bool:
        return _parse_bool(text)
    if key == "algo":
        return parse_algos(text.split(","))
    return kind(text.strip())


def parse_algos(names) -> tuple[PolicyKind, ...]:
    out: list[PolicyKind] = []
    for name in names:
        name = name.strip().lower()
        if not name:
            continue
        if name == "all":
            picks = list(ALL_POLICIES)
        else:
            try:
                picks = [PolicyKind(name)]
            except ValueError:
                raise ConfigError(
                    f"unknown algorithm {name!r} (choose dig, did, ucb1, egreedy, all)"
                ) from None
        out.extend(p for p in picks if p not in out)
    return tuple(out)


def read_config_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEYS:
            raise ConfigError(
                f"{path}:{lineno}: unknown key {key!r} "
                f"(valid keys: {', '.join(sorted(KEYS))})"
            )
        try:
            values[key] = parse_value(key, val)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return values


def build_config(values: Mapping) -> ExperimentConfig:
    """ExperimentConfig from a flat mapping; missing keys take the defaults."""
    d = ExperimentConfig()
    eps = (values.get("epsilon_lo", d.epsilon_range[0]),
           values.get("epsilon_hi", d.epsilon_range[1]))
    dlt = (values.get("delta_lo", d.delta_range[0]),
           values.get("delta_hi", d.delta_range[1]))
    out = values.get("out")
    return ExperimentConfig(
        policies=values.get("algo", d.policies),
        runs=values.get("runs", d.runs),
        trials=values.get("trials", d.trials),
        neighbors=values.get("neighbors", d.neighbors),
        depth=values.get("depth", d.depth),
        epsilon_range=eps,
        delta_range=dlt,
        master_seed=values.get("seed", d.master_seed),
        welch_window=values.get("welch_window", d.welch_window),
        welch_tol=values.get("welch_tol", d.welch_tol),
        output_dir=Path(out) if out is not None else None,
        paired=not values.get("decoupled", False),
        workers=values.get("workers", d.workers),
    )


def config_to_text(cfg: ExperimentConfig) -> str:
    """Render ``cfg`` in the file format read by :func:`read_config_file`."""
    items = [
        ("algo", ",".join(p.value for p in cfg.policies)),
        ("runs", cfg.runs),
        ("trials", cfg.trials),
        ("neighbors", cfg.neighbors),
        ("depth", cfg.depth),
        ("seed", cfg.master_seed),
        ("epsilon_lo", repr(cfg.epsilon_range[0])),
        ("epsilon_hi", repr(cfg.epsilon_range[1])),
        ("delta_lo", repr(cfg.delta_range[0])),
        ("delta_hi", repr(cfg.delta_range[1])),
        ("welch_window", cfg.welch_window),
        ("welch_tol", repr(cfg.welch_tol)),
        ("decoupled", str(not cfg.paired).lower()),
    ]
    return "".join(f"{k}={v}\n" for k, v in items)
