"""Experiment harness: timing, noise robustness, regression runs, invariants.

Each runner consumes a RunConfig and emits CSV rows with a fixed schema
(plus SVG plots that are pure functions of the CSVs); the `bench` CLI wraps
them with flat key=value configs.
"""

from .config import RunConfig, ConfigError, make_config
from .invariants import run_invariants
from .regression import run_regression
from .robustness import run_robustness
from .timing import run_timing

__all__ = [
    "RunConfig",
    "ConfigError",
    "make_config",
    "run_timing",
    "run_robustness",
    "run_regression",
    "run_invariants",
]
