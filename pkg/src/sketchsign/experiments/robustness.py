"""Noise sensitivity of sign estimators on near-low-rank matrices.

For each (n, sigma2, estimator) cell: draw cfg.bases base matrices, perturb
each with cfg.draws iid Gaussian noise draws, apply the estimator, and
average the entrywise covariance trace over bases.  Sketch randomness is
resampled fresh on every draw, so the reported variance includes it.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .. import linalg, orthogonalize, problems
from ..linalg import PolarConfig
from ..orthogonalize import SketchSpec
from .config import RunConfig, config_echo, resolve_dims, resolve_methods
from .records import ROBUSTNESS_HEADER, RunRecord, write_csv
from .svgplot import render_line_svg

__all__ = ["run_robustness", "robustness_record"]


def _estimator(method: str, rank: int, cfg: RunConfig):
    ns_cfg = PolarConfig(method="newton-schulz", ns_steps=cfg.ns_steps)
    if method == "newton-schulz-full":
        return lambda M, rng: linalg.newton_schulz(M, ns_cfg)
    if method == "gaussian-sketch":
        spec = SketchSpec(method="gaussian", rank=rank, polar=ns_cfg)
        return lambda M, rng: orthogonalize.sketch_sign_gaussian(M, spec, rng).dense()
    raise ValueError(f"unknown robustness estimator {method!r}")


def robustness_record(cfg: RunConfig) -> RunRecord:
    record = RunRecord(header=ROBUSTNESS_HEADER)
    seed = cfg.seeds[0]
    for n in resolve_dims(cfg):
        spec = problems.NearLowRankSpec(
            n=n,
            head_frac=cfg.head_frac,
            head_value=cfg.head_value,
            tail_value=cfg.tail_value,
        )
        rank = cfg.rank if cfg.rank > 0 else max(1, math.ceil(cfg.rank_frac * n))
        bases = [
            problems.gen_near_lowrank(spec, np.random.default_rng([seed, n, b]))
            for b in range(cfg.bases)
        ]
        for s_idx, sigma2 in enumerate(cfg.noise_vars):
            for m_idx, method in enumerate(resolve_methods(cfg)):
                est = _estimator(method, rank, cfg)
                traces = []
                for b, M in enumerate(bases):
                    rng = np.random.default_rng([seed, n, s_idx, m_idx, b])
                    traces.append(
                        problems.empirical_sign_covariance(
                            M, sigma2, cfg.draws, est, rng
                        )
                    )
                record.append(n, float(sigma2), method, float(np.mean(traces)))
    return record


def run_robustness(cfg: RunConfig) -> dict[str, Path]:
    """Write robustness.csv plus a cov-trace-vs-sigma2 plot; returns paths."""
    record = robustness_record(cfg)
    record.meta["config"] = config_echo(cfg)
    out_dir = Path(cfg.output_dir)
    csv_path = write_csv(out_dir / "robustness.csv", record)

    by_key: dict[str, tuple[list[float], list[float]]] = {}
    for n, sigma2, method, trace in record.rows:
        label = f"{method} n={n}"
        xs, ys = by_key.setdefault(label, ([], []))
        xs.append(float(sigma2))
        ys.append(float(trace))
    series = [(label, xs, ys) for label, (xs, ys) in sorted(by_key.items())]
    svg = render_line_svg(
        series,
        title="sign estimator covariance trace",
        xlabel="noise variance",
        ylabel="trace",
        ylog=True,
    )
    svg_path = out_dir / "robustness.svg"
    svg_path.write_text(svg)
    return {"robustness.csv": csv_path, "robustness.svg": svg_path}
