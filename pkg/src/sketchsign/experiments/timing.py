"""Wall-time comparison of orthogonalization routes on near-low-rank input.

Each (n, method) cell runs serially with BLAS pinned to one thread, takes
cfg.warmup discarded passes then cfg.reps timed ones, and reports median
and interquartile range in nanoseconds.  The gaussian-sketch cell is timed
phase by phase (qr / polar / other / total): the timed work is construction
of the sign estimate itself; diagnostic residuals are not part of it.
"""

from __future__ import annotations

import math
import time
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .. import linalg, orthogonalize, problems
from ..linalg import PolarConfig
from .config import RunConfig, config_echo, resolve_dims, resolve_methods
from .records import TIMING_HEADER, RunRecord, write_csv
from .svgplot import render_line_svg

__all__ = ["run_timing", "timing_record"]


def _sketch_rank(cfg: RunConfig, n: int) -> int:
    return cfg.rank if cfg.rank > 0 else max(1, math.ceil(cfg.rank_frac * n))


def _time_method(
    method: str, M: np.ndarray, cfg: RunConfig, rng: np.random.Generator
) -> dict[str, int]:
    """One pass; returns elapsed ns per phase (always includes 'total')."""
    n = min(M.shape)
    r = _sketch_rank(cfg, n)
    ns_cfg = PolarConfig(method="newton-schulz", ns_steps=cfg.ns_steps)
    polar_cfg = ns_cfg if cfg.polar == "newton-schulz" else PolarConfig()
    clock = time.perf_counter_ns

    if method == "gaussian-sketch":
        t0 = clock()
        G = linalg.gaussian_matrix(M.shape[1], r, rng)
        Y = M @ G
        t1 = clock()
        Q = linalg.qr_thin(Y)
        t2 = clock()
        B = Q.T @ M
        t3 = clock()
        S = linalg.polar_sign(B, polar_cfg)
        t4 = clock()
        Q @ S
        t5 = clock()
        return {
            "qr": t2 - t1,
            "polar": t4 - t3,
            "other": (t1 - t0) + (t3 - t2) + (t5 - t4),
            "total": t5 - t0,
        }

    t0 = clock()
    if method == "exact-svd":
        linalg.msgn_exact(M)
    elif method == "newton-schulz":
        linalg.newton_schulz(M, ns_cfg)
    elif method == "column-select":
        spec = orthogonalize.SketchSpec(method="column-select", rank=r, polar=polar_cfg)
        orthogonalize.sketch_sign_column_select(M, spec, rng)
    elif method == "power-iteration":
        spec = orthogonalize.SketchSpec(
            method="power", rank=r, power_q=cfg.power_q, polar=polar_cfg
        )
        orthogonalize.sketch_sign_power(M, spec, rng)
    elif method == "truncated-svd":
        f = orthogonalize.truncated_svd(M, r, cfg.power_q, rng)
        f.U @ f.V.T
    else:
        raise ValueError(f"unknown timing method {method!r}")
    return {"total": clock() - t0}


def timing_record(cfg: RunConfig) -> RunRecord:
    record = RunRecord(header=TIMING_HEADER)
    seed = cfg.seeds[0]
    with threadpool_limits(limits=1):
        for n in resolve_dims(cfg):
            spec = problems.NearLowRankSpec(
                n=n,
                head_frac=cfg.head_frac,
                head_value=cfg.head_value,
                tail_value=cfg.tail_value,
            )
            M = problems.gen_near_lowrank(spec, np.random.default_rng([seed, n]))
            for m_idx, method in enumerate(resolve_methods(cfg)):
                rng = np.random.default_rng([seed, n, m_idx])
                samples: dict[str, list[int]] = {}
                for rep in range(cfg.warmup + cfg.reps):
                    phases = _time_method(method, M, cfg, rng)
                    if rep < cfg.warmup:
                        continue
                    for phase, ns in phases.items():
                        samples.setdefault(phase, []).append(ns)
                for phase in sorted(samples):
                    vals = np.asarray(samples[phase])
                    q25, q50, q75 = np.percentile(vals, [25, 50, 75])
                    record.append(n, method, phase, int(q50), int(q75 - q25))
    return record


def run_timing(cfg: RunConfig) -> dict[str, Path]:
    """Write timing.csv plus a median-vs-n plot; returns output paths."""
    record = timing_record(cfg)
    record.meta["config"] = config_echo(cfg)
    out_dir = Path(cfg.output_dir)
    csv_path = write_csv(out_dir / "timing.csv", record)

    by_method: dict[str, tuple[list[float], list[float]]] = {}
    for n, method, phase, median_ns, _iqr in record.rows:
        if phase != "total":
            continue
        xs, ys = by_method.setdefault(str(method), ([], []))
        xs.append(float(n))
        ys.append(float(median_ns) / 1e6)
    series = [(m, xs, ys) for m, (xs, ys) in sorted(by_method.items())]
    svg = render_line_svg(
        series,
        title="orthogonalization wall time",
        xlabel="n",
        ylabel="median ms",
        ylog=True,
    )
    svg_path = out_dir / "timing.svg"
    svg_path.write_text(svg)
    return {"timing.csv": csv_path, "timing.svg": svg_path}
