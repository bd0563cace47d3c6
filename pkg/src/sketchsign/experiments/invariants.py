"""Machine-checkable property suite spanning every module.

Each registered property computes a scalar `measured` that must be <= its
`bound`; `bench invariants` writes one JSON line per property and exits
nonzero if any fails.  The checks are small and deterministic for a fixed
seed, so they double as a fast health probe for modified builds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import linalg, optimizers, orthogonalize, problems
from ..linalg import PolarConfig
from ..optimizers import MuonState, ScheduleParams, TheoryBounds
from ..orthogonalize import SafeguardPolicy, SketchSpec
from .config import RunConfig

__all__ = ["PropertyResult", "run_invariants", "REGISTRY"]

_NS = PolarConfig(method="newton-schulz", ns_steps=5)


@dataclass
class PropertyResult:
    name: str
    measured: float
    bound: float
    passed: bool


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng([seed, tag])


def _ratio_matrix(rng: np.random.Generator, m: int = 16, n: int = 12) -> np.ndarray:
    """Random matrix with singular-value ratio >= 0.3."""
    s = rng.uniform(0.3, 1.0, size=n)
    s[0] = 1.0
    U = problems._haar_columns(m, n, rng)
    V = problems._haar_columns(n, n, rng)
    return (U * s) @ V.T


def _ns_deviation(M: np.ndarray, steps: int) -> float:
    cfg = PolarConfig(method="newton-schulz", ns_steps=steps)
    diff = linalg.newton_schulz(M, cfg) - linalg.msgn_exact(M)
    return float(np.linalg.norm(diff, 2))


# --- linalg ---------------------------------------------------------------


def _p_msgn_duality(seed: int) -> tuple[float, float]:
    rng = _rng(seed, 1)
    worst = 0.0
    for shape in ((30, 20), (20, 30), (25, 25)):
        M = rng.standard_normal(shape)
        sign = linalg.msgn_exact(M)
        nn = linalg.norms(M).nuclear
        worst = max(worst, abs(float(np.sum(M * sign)) - nn) / nn)
        worst = max(worst, abs(linalg.norms(sign).spectral - 1.0))
    return worst, 1e-8


def _p_msgn_idempotent(seed: int) -> tuple[float, float]:
    rng = _rng(seed, 2)
    M = rng.standard_normal((24, 17))
    sign = linalg.msgn_exact(M)
    return float(np.linalg.norm(linalg.msgn_exact(sign) - sign)), 1e-8


def _p_qr_thin_orthonormal(seed: int) -> tuple[float, float]:
    rng = _rng(seed, 3)
    worst = 0.0
    full = rng.standard_normal((40, 12))
    deficient = rng.standard_normal((40, 4)) @ rng.standard_normal((4, 12))
    for M in (full, deficient):
        Q = linalg.qr_thin(M)
        worst = max(
            worst, float(np.max(np.abs(Q.T @ Q - np.eye(Q.shape[1]))))
        )
    return worst, 1e-10


def _p_best_rank_k_frobenius(seed: int) -> tuple[float, float]:
    rng = _rng(seed, 4)
    M = rng.standard_normal((30, 22))
    s = np.linalg.svd(M, compute_uv=False)
    worst = 0.0
    for k in (1, 5, 10):
        err = float(np.linalg.norm(M - linalg.best_rank_k(M, k)))
        ref = float(np.sqrt(np.sum(s[k:] ** 2)))
        worst = max(worst, abs(err - ref) / ref)
    return worst, 1e-9


def _p_best_rank_k_nuclear(seed: int) -> tuple[float, float]:
    rng = _rng(seed, 5)
    M = rng.standard_normal((30, 22))
    s = np.linalg.svd(M, compute_uv=False)
    worst = 0.0
    for k in (1, 5, 10):
        err = linalg.norms(M - linalg.best_rank_k(M, k)).nuclear
        ref = float(np.sum(s[k:]))
        worst = max(worst, abs(err - ref) / ref)
    return worst, 1e-9


def _p_newton_schulz_5step(seed: int) -> tuple[float, float]:
    rng = _rng(seed, 6)
    return max(_ns_deviation(_ratio_matrix(rng), 5) for _ in range(3)), 0.3


def _p_newton_schulz_10step(seed: int) -> tuple[float, float]:
    rng = _rng(seed, 7)
    return max(_ns_deviation(_ratio_matrix(rng), 10) for _ in range(3)), 0.05


def _p_newton_schulz_monotone(seed: int) -> tuple[float, float]:
    rng = _rng(seed, 8)
    worst = -math.inf
    for _ in range(3):
        M = _ratio_matrix(rng)
        d5, d10, d20 = (_ns_deviation(M, s) for s in (5, 10, 20))
        worst = max(worst, d10 - d5, d20 - d10)
    return worst, 1e-12


def _p_newton_schulz_spectral_cap(seed: int) -> tuple[float, float]:
    rng = _rng(seed, 9)
    worst = 0.0
    for shape in ((16, 12), (12, 16), (30, 5)):
        M = rng.standard_normal(shape) @ np.diag(rng.uniform(1e-6, 1.0, shape[1]))
        worst = max(worst, linalg.norms(linalg.newton_schulz(M, _NS)).spectral)
    return worst, 1.3


# --- orthogonalize --------------------------------------------------------


def _p_factorization_identity(seed: int) -> tuple[float, float]:
    rng = _rng(seed, 10)
    worst = 0.0
    for method in ("gaussian", "column-select", "power"):
        for _ in range(3):
            M = rng.standard_normal((40, 30))
            spec = SketchSpec(method=method, rank=8, power_q=2)
            sign = orthogonalize.sketch_sign(M, spec, rng)
            ref = linalg.msgn_exact(sign.Q @ (sign.Q.T @ M))
            worst = max(worst, float(np.linalg.norm(sign.dense() - ref)))
    return worst, 1e-8


def _p_exact_recovery(seed: int) -> tuple[float, float]:
    worst = 0.0
    for trial in range(20):
        rng = _rng(seed, 11 + 1000 * trial)
        M = rng.standard_normal((30, 3)) @ rng.standard_normal((3, 20))
        ref = linalg.msgn_exact(M)
        for spec in (
            SketchSpec(method="gaussian", rank=5),
            SketchSpec(method="power", rank=5, power_q=2),
        ):
            sign = orthogonalize.sketch_sign(M, spec, rng)
            worst = max(worst, float(np.linalg.norm(sign.dense() - ref)))
    return worst, 1e-8


def _p_column_probabilities(seed: int) -> tuple[float, float]:
    rng = _rng(seed, 12)
    worst = 0.0
    for _ in range(5):
        p = orthogonalize.column_probabilities(rng.standard_normal((15, 40)))
        worst = max(worst, abs(float(p.sum()) - 1.0))
        worst = max(worst, float(-p.min()))
    return worst, 1e-12


def _p_power_q0_bitwise(seed: int) -> tuple[float, float]:
    M = _rng(seed, 13).standard_normal((35, 25))
    a = orthogonalize.sketch_sign_gaussian(
        M, SketchSpec(method="gaussian", rank=6), _rng(seed, 14)
    )
    b = orthogonalize.sketch_sign_power(
        M, SketchSpec(method="power", rank=6, power_q=0), _rng(seed, 14)
    )
    return float(np.max(np.abs(a.dense() - b.dense()))), 0.0


def _p_safeguard_certificate(seed: int) -> tuple[float, float]:
    rng = _rng(seed, 15)
    M = _ratio_matrix(rng, 40, 30)
    nuc = linalg.norms(M).nuclear
    policy = SafeguardPolicy(r0=2)
    worst = -math.inf
    for frac in (0.5, 0.05):
        delta = frac * nuc
        sign = orthogonalize.safeguarded_sketch(
            M, delta, policy, SketchSpec(rank=2), rng
        )
        value, _ = orthogonalize.residual_nuclear(M, sign.Q, mode="exact-nuclear")
        worst = max(worst, value - delta)
    return worst, 0.0


def _p_residual_upper_bound(seed: int) -> tuple[float, float]:
    rng = _rng(seed, 16)
    M = rng.standard_normal((30, 24))
    Q = orthogonalize._range_finder(M, 6, 0, rng)
    exact, _ = orthogonalize.residual_nuclear(M, Q, mode="exact-nuclear")
    upper, flagged = orthogonalize.residual_nuclear(M, Q, mode="frobenius-upper")
    if not flagged:
        return math.inf, 1e-12
    return exact - upper, 1e-12


# --- optimizers -----------------------------------------------------------


def _p_schedule(seed: int) -> tuple[float, float]:
    worst = 0.0
    for params in (
        ScheduleParams(kind="fixed-rank-gd"),
        ScheduleParams(kind="safeguarded-gd"),
        ScheduleParams(kind="muon-heavy-tail", alpha=2.0),
        ScheduleParams(kind="muon-heavy-tail", alpha=1.5),
    ):
        prev = None
        for k in (0, 1, 2, 3, 7, 15, 63, 255, 4095):
            sizes = optimizers.schedule(params, k)
            vals = [v for v in sizes if v is not None]
            if k == 0:
                worst = max(worst, max(abs(v - 1.0) for v in vals))
            if prev is not None:
                worst = max(worst, max(v - p for v, p in zip(vals, prev)))
            prev = vals
    exact = optimizers.schedule(ScheduleParams(kind="muon-heavy-tail", alpha=2.0), 15)
    worst = max(
        worst,
        abs(exact.eta - 0.125),
        abs(exact.theta - 0.25),
        abs(exact.delta - 0.5),
    )
    return worst, 0.0


def _p_signed_step_cap(seed: int) -> tuple[float, float]:
    rng = _rng(seed, 17)
    X = rng.standard_normal((20, 15))
    worst = 0.0
    for k in (0, 3, 9):
        grad = rng.standard_normal((20, 15))
        X_next, _ = optimizers.step_fixed_rank_gd(X, grad, k, SketchSpec(rank=4), rng)
        eta = optimizers.schedule(ScheduleParams(kind="fixed-rank-gd"), k).eta
        step_norm = float(np.linalg.norm(X_next - X, 2))
        worst = max(worst, step_norm / eta - 1.0)
    return worst, 1e-10


def _p_muon_momentum_sample_only(seed: int) -> tuple[float, float]:
    rng = _rng(seed, 18)
    samples = [rng.standard_normal((12, 10)) for _ in range(5)]
    states = [MuonState.initial((12, 10)), MuonState.initial((12, 10))]
    X = [np.zeros((12, 10)), np.zeros((12, 10))]
    worst = 0.0
    for k, g in enumerate(samples):
        for i, sketch_seed in enumerate((101, 202)):
            X[i], states[i] = optimizers.step_lowrank_muon(
                states[i], X[i], g, k,
                base=SketchSpec(rank=3),
                rng=_rng(seed, sketch_seed + 10 * k),
            )
        worst = max(
            worst, float(np.max(np.abs(states[0].momentum - states[1].momentum)))
        )
    return worst, 0.0


def _p_full_rank_reduction(seed: int) -> tuple[float, float]:
    rng = _rng(seed, 19)
    g = rng.standard_normal((10, 10))
    X0 = np.zeros((10, 10))
    lr_X, _ = optimizers.step_lowrank_muon(
        MuonState.initial((10, 10)), X0, g, 0,
        base=SketchSpec(rank=10), rng=_rng(seed, 20),
        policy=SafeguardPolicy(r0=10),
    )
    full_X, _ = optimizers.step_vanilla_muon(
        MuonState.initial((10, 10)), X0, g, 0
    )
    return float(np.max(np.abs(lr_X - full_X))), 1e-10


def _p_theory_constants(seed: int) -> tuple[float, float]:
    bounds = TheoryBounds(f_low=0.0, L_star=1.0, sigma=0.0, alpha=2.0, rho=4)
    worst = abs(optimizers.u_mn(bounds, 0.0) - 20.0)
    worst = max(worst, abs(optimizers.u_gd(bounds, 3.0) - 8.0))
    gd_rhs, _ = optimizers.theory_bounds(bounds, 0.0, 100)
    worst = max(worst, abs(gd_rhs - 5.0 * math.log(100.0) / 10.0))
    return worst, 0.0


# --- problems -------------------------------------------------------------


def _p_gradient_finite_difference(seed: int) -> tuple[float, float]:
    rng = _rng(seed, 21)
    inst = problems.gen_matrix_regression(25, 5, sv_base=1.5, seed=seed)
    X = rng.standard_normal((25, 25))
    grad = inst.gradient(X)
    worst = 0.0
    h = 1e-5
    for _ in range(3):
        D = rng.standard_normal((25, 25))
        D /= np.linalg.norm(D)
        fd = (inst.objective(X + h * D) - inst.objective(X - h * D)) / (2 * h)
        exact = float(np.sum(grad * D))
        worst = max(worst, abs(fd - exact) / max(abs(exact), 1e-12))
    return worst, 1e-4


def _p_lipschitz_upper(seed: int) -> tuple[float, float]:
    rng = _rng(seed, 22)
    inst = problems.gen_matrix_regression(20, 6, sv_base=1.4, seed=seed)
    worst = 0.0
    for _ in range(10):
        X = rng.standard_normal((20, 20))
        Y = rng.standard_normal((20, 20))
        diff = linalg.norms(inst.gradient(X) - inst.gradient(Y)).nuclear
        gap = float(np.linalg.norm(X - Y, 2))
        worst = max(worst, diff / (inst.lipschitz_upper * gap))
    return worst, 1.0


def _p_near_lowrank_spectrum(seed: int) -> tuple[float, float]:
    spec = problems.NearLowRankSpec(n=60, head_frac=0.1, tail_value=1e-4)
    M = problems.gen_near_lowrank(spec, _rng(seed, 23))
    s = np.linalg.svd(M, compute_uv=False)
    worst = float(np.max(np.abs(s[: spec.head] - spec.head_value)))
    worst = max(worst, float(np.max(np.abs(s[spec.head :] - spec.tail_value))))
    tail_fro = float(np.linalg.norm(M - linalg.best_rank_k(M, spec.head)))
    ref = spec.tail_value * math.sqrt(spec.n - spec.head)
    return max(worst, abs(tail_fro - ref)), 1e-9


def _p_noise_moment(seed: int) -> tuple[float, float]:
    draws = 20000
    worst = 0.0
    for model in (
        problems.NoiseModel(kind="gaussian-frobenius", sigma=3.0),
        problems.NoiseModel(kind="heavy-tail-pareto", sigma=2.0, alpha=2.0),
    ):
        rng = _rng(seed, 24)
        acc = 0.0
        for _ in range(draws):
            Z = problems.sample_noise(model, (8, 6), rng)
            acc += float(np.sum(Z * Z)) ** (model.alpha / 2.0)
        worst = max(worst, abs(acc / draws / model.sigma**model.alpha - 1.0))
    return worst, 0.1


def _p_container_roundtrip(seed: int, tmp: Path | None = None) -> tuple[float, float]:
    import tempfile

    inst = problems.gen_matrix_regression(12, 4, sv_base=1.3, seed=seed)
    with tempfile.TemporaryDirectory() as d:
        path = Path(d) / "inst.ssmx"
        problems.save_instance(inst, path)
        back = problems.load_instance(path)
    worst = 0.0
    for a, b in (
        (inst.A, back.A), (inst.B, back.B), (inst.C, back.C),
        (inst.X_star, back.X_star), (inst.E, back.E),
    ):
        worst = max(worst, float(np.max(np.abs(a - b))))
    worst = max(worst, abs(inst.noise_scale - back.noise_scale))
    return worst, 0.0


REGISTRY: list[tuple[str, object]] = [
    ("msgn-duality", _p_msgn_duality),
    ("msgn-idempotent", _p_msgn_idempotent),
    ("qr-thin-orthonormal", _p_qr_thin_orthonormal),
    ("best-rank-k-frobenius", _p_best_rank_k_frobenius),
    ("best-rank-k-nuclear", _p_best_rank_k_nuclear),
    ("newton-schulz-5step", _p_newton_schulz_5step),
    ("newton-schulz-10step", _p_newton_schulz_10step),
    ("newton-schulz-monotone", _p_newton_schulz_monotone),
    ("newton-schulz-spectral-cap", _p_newton_schulz_spectral_cap),
    ("factorization-identity", _p_factorization_identity),
    ("exact-recovery", _p_exact_recovery),
    ("column-probabilities", _p_column_probabilities),
    ("power-q0-bitwise", _p_power_q0_bitwise),
    ("safeguard-certificate", _p_safeguard_certificate),
    ("residual-upper-bound", _p_residual_upper_bound),
    ("schedule-family", _p_schedule),
    ("signed-step-cap", _p_signed_step_cap),
    ("muon-momentum-sample-only", _p_muon_momentum_sample_only),
    ("full-rank-reduction", _p_full_rank_reduction),
    ("theory-constants", _p_theory_constants),
    ("gradient-finite-difference", _p_gradient_finite_difference),
    ("lipschitz-upper", _p_lipschitz_upper),
    ("near-lowrank-spectrum", _p_near_lowrank_spectrum),
    ("noise-moment-calibration", _p_noise_moment),
    ("container-roundtrip", _p_container_roundtrip),
]


def run_invariants(cfg: RunConfig) -> list[PropertyResult]:
    """Evaluate every registered property; write one JSON line per property."""
    seed = cfg.seeds[0]
    results = []
    for name, fn in REGISTRY:
        try:
            measured, bound = fn(seed)
            passed = bool(measured <= bound)
        except Exception:  # a crashed property is a failed property
            measured, bound, passed = math.inf, 0.0, False
        results.append(
            PropertyResult(name=name, measured=float(measured), bound=float(bound), passed=passed)
        )
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [
        json.dumps(
            {"name": r.name, "measured": r.measured, "bound": r.bound, "pass": r.passed}
        )
        for r in results
    ]
    (out_dir / "invariants.jsonl").write_text("\n".join(lines) + "\n")
    return results
