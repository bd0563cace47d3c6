"""Flat key=value run configuration with CLI overrides.

Config files are lines of ``key = value`` (lists comma-separated, booleans
true/false, # starts a comment).  Precedence: defaults < BENCH_OUTPUT_DIR
env var (output_dir only) < config file < command-line flags.  Every field
has a default, so a config carrying only the experiment name is runnable.
"""

from __future__ import annotations

import dataclasses
import os
import typing
from dataclasses import dataclass
from pathlib import Path

__all__ = [
    "RunConfig",
    "ConfigError",
    "EXPERIMENTS",
    "ALLOWED_METHODS",
    "load_config_file",
    "make_config",
    "resolve_methods",
    "resolve_dims",
    "config_echo",
]

EXPERIMENTS = ("timing", "robustness", "regression", "invariants")

ALLOWED_METHODS = {
    "timing": (
        "exact-svd",
        "newton-schulz",
        "gaussian-sketch",
        "column-select",
        "power-iteration",
        "truncated-svd",
    ),
    "robustness": ("newton-schulz-full", "gaussian-sketch"),
    "regression": ("lr-gd", "safeguarded-gd", "lr-muon", "muon", "sgdm", "adamw"),
    "invariants": (),
}

DEFAULT_METHODS = {
    "timing": ALLOWED_METHODS["timing"],
    "robustness": ALLOWED_METHODS["robustness"],
    "regression": ("lr-muon", "muon", "adamw", "sgdm"),
    "invariants": (),
}

DEFAULT_DIMS = {
    "timing": (256, 512, 1024, 2048),
    "robustness": (500,),
    "regression": (),
    "invariants": (),
}

OUTPUT_DIR_ENV = "BENCH_OUTPUT_DIR"


class ConfigError(ValueError):
    """Bad key, bad value, or unknown method/experiment (CLI exit code 2)."""


@dataclass
class RunConfig:
    """Every knob of the harness; see the module docstring for file syntax."""

    experiment: str = "regression"
    seeds: tuple[int, ...] = (0, 1, 2)
    output_dir: str = "bench-results"
    methods: tuple[str, ...] = ()  # empty -> per-experiment default
    dims: tuple[int, ...] = ()  # empty -> per-experiment default

    # sketch controls
    rank: int = 0  # 0 -> ceil(rank_frac * min(m, n))
    rank_frac: float = 0.1
    power_q: int = 2
    polar: str = "exact-svd"
    ns_steps: int = 5

    # safeguard controls
    r0: int = 0  # 0 -> same rule as rank
    growth_factor: float = 2.0
    max_redraws: int = 1
    residual_mode: str = "exact-nuclear"

    # optimizer controls
    iters: int = 2000
    alpha: float = 2.0
    lr_scale: float = 1.0
    muon_safeguard: bool = True
    sgdm_lr: float = 1e-3
    sgdm_momentum: float = 0.9
    sgdm_weight_decay: float = 0.0
    adamw_lr: float = 1e-3
    adamw_beta1: float = 0.9
    adamw_beta2: float = 0.999
    adamw_eps: float = 1e-8
    adamw_weight_decay: float = 0.0

    # regression instance
    n: int = 200
    p: int = 20
    sv_base: float = 1.2
    noise_scale: float = 1e-3
    noise_kind: str = "none"
    noise_sigma: float = 1.0

    # robustness study
    noise_vars: tuple[float, ...] = (0.1, 1.0, 10.0)
    bases: int = 5
    draws: int = 30
    head_frac: float = 0.1
    head_value: float = 1.0
    tail_value: float = 1e-4

    # timing study
    reps: int = 10
    warmup: int = 1


_FIELD_TYPES = typing.get_type_hints(RunConfig)


def _parse_value(key: str, text: str):
    typ = _FIELD_TYPES[key]
    text = text.strip()
    try:
        if typ is int:
            return int(text)
        if typ is float:
            return float(text)
        if typ is bool:
            low = text.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if typ is str:
            return text
        item = typing.get_args(typ)[0]
        parts = [p.strip() for p in text.split(",") if p.strip()]
        return tuple(item(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from None


def load_config_file(path: str | Path) -> dict[str, str]:
    kv: dict[str, str] = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        kv[key.strip()] = value.strip()
    return kv


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {cfg.experiment!r}; choose from {', '.join(EXPERIMENTS)}"
        )
    allowed = ALLOWED_METHODS[cfg.experiment]
    for m in cfg.methods:
        if m not in allowed:
            raise ConfigError(
                f"unknown method {m!r} for experiment {cfg.experiment!r}; "
                f"allowed: {', '.join(allowed) or '(none)'}"
            )
    if not (1.0 < cfg.alpha <= 2.0):
        raise ConfigError("alpha must lie in (1, 2]")
    if not (0.0 < cfg.rank_frac <= 1.0):
        raise ConfigError("rank_frac must lie in (0, 1]")
    if cfg.polar not in ("exact-svd", "newton-schulz"):
        raise ConfigError(f"unknown polar method {cfg.polar!r}")
    if cfg.residual_mode not in ("exact-nuclear", "frobenius-upper"):
        raise ConfigError(f"unknown residual mode {cfg.residual_mode!r}")
    if not cfg.seeds:
        raise ConfigError("seeds must be nonempty")
    if cfg.reps < 1 or cfg.warmup < 0 or cfg.iters < 1:
        raise ConfigError("reps/iters must be >= 1 and warmup >= 0")
    if cfg.bases < 1 or cfg.draws < 2:
        raise ConfigError("bases must be >= 1 and draws >= 2")
    return cfg


def make_config(
    file_kv: dict[str, str] | None = None,
    cli_kv: dict[str, str] | None = None,
) -> RunConfig:
    """Defaults, then env output dir, then file entries, then CLI flags."""
    values: dict[str, object] = {}
    env_out = os.environ.get(OUTPUT_DIR_ENV)
    if env_out:
        values["output_dir"] = env_out
    for source in (file_kv or {}, cli_kv or {}):
        for key, text in source.items():
            if key not in _FIELD_TYPES:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = _parse_value(key, text)
    return _validate(RunConfig(**values))


def resolve_methods(cfg: RunConfig) -> tuple[str, ...]:
    return cfg.methods if cfg.methods else DEFAULT_METHODS[cfg.experiment]


def resolve_dims(cfg: RunConfig) -> tuple[int, ...]:
    return cfg.dims if cfg.dims else DEFAULT_DIMS[cfg.experiment]


def config_echo(cfg: RunConfig) -> str:
    """Canonical flat echo of the fully-resolved config (sorted keys)."""
    parts = []
    for f in sorted(dataclasses.fields(cfg), key=lambda f: f.name):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        parts.append(f"{f.name}={value}")
    return " ".join(parts)
