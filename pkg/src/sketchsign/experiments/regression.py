"""Optimizer comparison on the ill-conditioned matrix regression problem.

One CSV per (method, seed) with the per-iteration schema, plus two SVG
plots (objective and gradient Frobenius norm versus iteration) rebuilt
from the first seed's CSVs alone.  Methods that blow up stop recording at
the first non-finite metric, so emitted rows are always finite.
"""

from __future__ import annotations

import math
import time
from pathlib import Path

import numpy as np

from .. import optimizers, problems
from ..linalg import PolarConfig
from ..optimizers import AdamWState, MuonState, SgdmState
from ..orthogonalize import SafeguardPolicy, SketchSpec
from .config import RunConfig, config_echo, resolve_methods
from .records import REGRESSION_HEADER, RunRecord, read_csv, write_csv
from .svgplot import render_line_svg

__all__ = ["run_regression", "run_method", "render_plots"]


def _polar(cfg: RunConfig) -> PolarConfig:
    if cfg.polar == "newton-schulz":
        return PolarConfig(method="newton-schulz", ns_steps=cfg.ns_steps)
    return PolarConfig()


def _sketch_rank(cfg: RunConfig, n: int) -> int:
    return cfg.rank if cfg.rank > 0 else max(1, math.ceil(cfg.rank_frac * n))


def run_method(
    inst: problems.MatrixRegressionInstance,
    method: str,
    cfg: RunConfig,
    seed: int,
) -> RunRecord:
    """Run one optimizer from X = 0 and record the per-iteration schema."""
    n = inst.n
    spec = SketchSpec(
        method="gaussian", rank=_sketch_rank(cfg, n), power_q=cfg.power_q, polar=_polar(cfg)
    )
    r0 = cfg.r0 if cfg.r0 > 0 else spec.rank
    policy = SafeguardPolicy(
        r0=r0,
        growth_factor=cfg.growth_factor,
        max_redraws=cfg.max_redraws,
        residual_mode=cfg.residual_mode,
    )
    noise = problems.NoiseModel(
        kind=cfg.noise_kind, sigma=cfg.noise_sigma, alpha=cfg.alpha
    )
    sketch_rng = np.random.default_rng([seed, 1])
    noise_rng = np.random.default_rng([seed, 2])

    X = np.zeros((n, n))
    muon_state = MuonState.initial((n, n))
    sgdm_state = SgdmState.initial((n, n))
    adamw_state = AdamWState.initial((n, n))

    record = RunRecord(header=REGRESSION_HEADER)
    record.meta = {"seed": str(seed), "method": method, "config": config_echo(cfg)}
    t0 = time.perf_counter_ns()
    for k in range(cfg.iters):
        f = inst.objective(X)
        grad = inst.gradient(X)
        if not (math.isfinite(f) and np.isfinite(grad).all()):
            break
        sv = np.linalg.svd(grad, compute_uv=False)
        with np.errstate(over="ignore"):
            grad_fro = float(np.sqrt(np.sum(sv * sv)))
        grad_nuc = float(sv.sum())
        # sv**2 can overflow to inf while f and grad are still finite
        if not (math.isfinite(grad_fro) and math.isfinite(grad_nuc)):
            break

        rank_used = 0
        residual = 0.0
        if method == "lr-gd":
            X, sign = optimizers.step_fixed_rank_gd(
                X, grad, k, spec, sketch_rng, lr_scale=cfg.lr_scale
            )
            if sign is not None:
                rank_used, residual = sign.r_used, sign.residual_nuclear
        elif method == "safeguarded-gd":
            X, sign = optimizers.step_safeguarded_gd(
                X, grad, k, policy, spec, sketch_rng, lr_scale=cfg.lr_scale
            )
            if sign is not None:
                rank_used, residual = sign.r_used, sign.residual_nuclear
        elif method == "lr-muon":
            g = problems.sample_stoch_grad(inst, X, noise, noise_rng)
            X, muon_state = optimizers.step_lowrank_muon(
                muon_state,
                X,
                g,
                k,
                base=spec,
                rng=sketch_rng,
                alpha=cfg.alpha,
                policy=policy if cfg.muon_safeguard else None,
                lr_scale=cfg.lr_scale,
            )
            rank_used = muon_state.last_rank_used
            residual = muon_state.last_residual
        elif method == "muon":
            g = problems.sample_stoch_grad(inst, X, noise, noise_rng)
            X, muon_state = optimizers.step_vanilla_muon(
                muon_state, X, g, k, polar=_polar(cfg), alpha=cfg.alpha,
                lr_scale=cfg.lr_scale,
            )
            rank_used = muon_state.last_rank_used
        elif method == "sgdm":
            g = problems.sample_stoch_grad(inst, X, noise, noise_rng)
            X, sgdm_state = optimizers.step_sgdm(
                sgdm_state, X, g,
                lr=cfg.sgdm_lr,
                momentum_coef=cfg.sgdm_momentum,
                weight_decay=cfg.sgdm_weight_decay,
            )
        elif method == "adamw":
            g = problems.sample_stoch_grad(inst, X, noise, noise_rng)
            X, adamw_state = optimizers.step_adamw(
                adamw_state, X, g,
                lr=cfg.adamw_lr,
                beta1=cfg.adamw_beta1,
                beta2=cfg.adamw_beta2,
                eps=cfg.adamw_eps,
                weight_decay=cfg.adamw_weight_decay,
            )
        else:
            raise ValueError(f"unknown regression method {method!r}")

        record.append(
            k, f, grad_fro, grad_nuc, rank_used, residual,
            time.perf_counter_ns() - t0,
        )
    return record


def render_plots(csv_paths: dict[str, Path], out_dir: Path) -> dict[str, Path]:
    """Rebuild the two comparison plots purely from the CSV files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}
    for fname, column, label in (
        ("objective.svg", 1, "f(X_k)"),
        ("grad_fro.svg", 2, "||grad||_F"),
    ):
        series = []
        for method, path in sorted(csv_paths.items()):
            _, _, rows = read_csv(path)
            xs = [float(r[0]) for r in rows]
            ys = [float(r[column]) for r in rows]
            series.append((method, xs, ys))
        svg = render_line_svg(
            series, title=f"{label} vs iteration", xlabel="iteration k",
            ylabel=label, ylog=True,
        )
        target = out_dir / fname
        target.write_text(svg)
        written[fname] = target
    return written


def run_regression(cfg: RunConfig) -> dict[str, Path]:
    """Write per-(method, seed) CSVs plus two SVG plots; returns the paths."""
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    methods = resolve_methods(cfg)
    written: dict[str, Path] = {}
    first_seed_csvs: dict[str, Path] = {}
    for seed in cfg.seeds:
        inst = problems.gen_matrix_regression(
            cfg.n, cfg.p, sv_base=cfg.sv_base, noise_scale=cfg.noise_scale, seed=seed
        )
        for method in methods:
            record = run_method(inst, method, cfg, seed)
            name = f"regression_{method}_seed{seed}.csv"
            written[name] = write_csv(out_dir / name, record)
            if seed == cfg.seeds[0]:
                first_seed_csvs[method] = written[name]
    written.update(render_plots(first_seed_csvs, out_dir))
    return written
