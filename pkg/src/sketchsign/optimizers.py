"""Matrix-signed descent steps, low-rank Muon, baselines, and rate bounds.

All steps are pure functions: state goes in, a new state comes out.  The
signed methods move along ``msgn`` of a direction matrix, so every update
has spectral norm at most eta_k (up to the polar method's tolerance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import linalg, orthogonalize
from .linalg import PolarConfig
from .orthogonalize import LowRankSign, SafeguardPolicy, SketchSpec

__all__ = [
    "ScheduleParams",
    "StepSizes",
    "schedule",
    "MuonState",
    "SgdmState",
    "AdamWState",
    "TheoryBounds",
    "step_fixed_rank_gd",
    "step_safeguarded_gd",
    "step_lowrank_muon",
    "step_vanilla_muon",
    "step_sgdm",
    "step_adamw",
    "u_gd",
    "u_mn",
    "theory_bounds",
]

_KINDS = ("fixed-rank-gd", "safeguarded-gd", "muon-heavy-tail")


@dataclass(frozen=True)
class ScheduleParams:
    """Step-size family: kind plus the tail exponent alpha for Muon."""

    kind: str = "safeguarded-gd"
    alpha: float = 2.0

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "muon-heavy-tail" and not (1.0 < self.alpha <= 2.0):
            raise ValueError("alpha must lie in (1, 2]")


class StepSizes(NamedTuple):
    eta: float
    theta: float | None
    delta: float | None


def schedule(params: ScheduleParams, k: int) -> StepSizes:
    """Step sizes at iteration k (all families start at 1 and decay).

    Signed GD uses eta_k = delta_k = (k+1)^{-1/2}.  The Muon family under
    an alpha-heavy-tail noise model uses

        eta_k   = (k+1)^{-(2a-1)/(3a-2)}
        theta_k = (k+1)^{-a/(3a-2)}
        delta_k = (k+1)^{-(a-1)/(3a-2)}

    computed in reciprocal form so that exact powers stay exact.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    t = k + 1.0
    if params.kind == "fixed-rank-gd":
        return StepSizes(eta=1.0 / math.sqrt(t), theta=None, delta=None)
    if params.kind == "safeguarded-gd":
        root = 1.0 / math.sqrt(t)
        return StepSizes(eta=root, theta=None, delta=root)
    a = params.alpha
    denom = 3.0 * a - 2.0
    return StepSizes(
        eta=1.0 / t ** ((2.0 * a - 1.0) / denom),
        theta=1.0 / t ** (a / denom),
        delta=1.0 / t ** ((a - 1.0) / denom),
    )


@dataclass
class MuonState:
    """Momentum buffer plus bookkeeping from the last sketch."""

    momentum: np.ndarray
    step_index: int = 0
    last_rank_used: int = 0
    last_residual: float = 0.0

    @classmethod
    def initial(cls, shape: tuple[int, int]) -> "MuonState":
        return cls(momentum=np.zeros(shape))


@dataclass
class SgdmState:
    velocity: np.ndarray

    @classmethod
    def initial(cls, shape: tuple[int, int]) -> "SgdmState":
        return cls(velocity=np.zeros(shape))


@dataclass
class AdamWState:
    exp_avg: np.ndarray
    exp_avg_sq: np.ndarray
    step_count: int = 0

    @classmethod
    def initial(cls, shape: tuple[int, int]) -> "AdamWState":
        return cls(exp_avg=np.zeros(shape), exp_avg_sq=np.zeros(shape))


def step_fixed_rank_gd(
    X: np.ndarray,
    grad: np.ndarray,
    k: int,
    spec: SketchSpec,
    rng: np.random.Generator,
    lr_scale: float = 1.0,
) -> tuple[np.ndarray, LowRankSign | None]:
    """One fixed-rank signed step: X - eta_k * Q S with eta_k = (k+1)^{-1/2}.

    A zero gradient means stationarity; X is returned unchanged.
    """
    if not grad.any():
        return X, None
    eta = schedule(ScheduleParams(kind="fixed-rank-gd"), k).eta * lr_scale
    sign = orthogonalize.sketch_sign(grad, spec, rng)
    return X - eta * sign.dense(), sign


def step_safeguarded_gd(
    X: np.ndarray,
    grad: np.ndarray,
    k: int,
    policy: SafeguardPolicy,
    base: SketchSpec,
    rng: np.random.Generator,
    lr_scale: float = 1.0,
) -> tuple[np.ndarray, LowRankSign | None]:
    """Signed step whose sketch is certified: ||grad - Q Q^T grad||_* <= delta_k."""
    if not grad.any():
        return X, None
    sizes = schedule(ScheduleParams(kind="safeguarded-gd"), k)
    sign = orthogonalize.safeguarded_sketch(grad, sizes.delta, policy, base, rng)
    return X - sizes.eta * lr_scale * sign.dense(), sign


def step_lowrank_muon(
    state: MuonState,
    X: np.ndarray,
    stoch_grad: np.ndarray,
    k: int,
    base: SketchSpec,
    rng: np.random.Generator,
    alpha: float = 2.0,
    policy: SafeguardPolicy | None = None,
    lr_scale: float = 1.0,
) -> tuple[np.ndarray, MuonState]:
    """Low-rank Muon step under the alpha-heavy-tail schedule.

    Momentum: M_k = (1 - theta_{k-1}) M_{k-1} + theta_{k-1} G, with
    theta_{-1} = 1 so the first step uses the sample directly.  The update
    direction is the sketch-sign of M_k; passing a policy enforces the
    per-step nuclear residual bound delta_k, otherwise the rank is fixed at
    base.rank.  Sketch randomness never feeds back into the momentum.
    """
    if state.step_index != k:
        raise ValueError(f"state is at step {state.step_index}, caller says {k}")
    params = ScheduleParams(kind="muon-heavy-tail", alpha=alpha)
    theta_prev = 1.0 if k == 0 else schedule(params, k - 1).theta
    M = (1.0 - theta_prev) * state.momentum + theta_prev * stoch_grad
    if not M.any():
        return X, MuonState(momentum=M, step_index=k + 1)
    sizes = schedule(params, k)
    if policy is None:
        sign = orthogonalize.sketch_sign(M, base, rng)
    else:
        sign = orthogonalize.safeguarded_sketch(M, sizes.delta, policy, base, rng)
    X_next = X - sizes.eta * lr_scale * sign.dense()
    return X_next, MuonState(
        momentum=M,
        step_index=k + 1,
        last_rank_used=sign.r_used,
        last_residual=sign.residual_nuclear,
    )


def step_vanilla_muon(
    state: MuonState,
    X: np.ndarray,
    stoch_grad: np.ndarray,
    k: int,
    polar: PolarConfig = PolarConfig(),
    alpha: float = 2.0,
    lr_scale: float = 1.0,
) -> tuple[np.ndarray, MuonState]:
    """Full-matrix Muon baseline: same momentum and schedule, exact-width sign."""
    if state.step_index != k:
        raise ValueError(f"state is at step {state.step_index}, caller says {k}")
    params = ScheduleParams(kind="muon-heavy-tail", alpha=alpha)
    theta_prev = 1.0 if k == 0 else schedule(params, k - 1).theta
    M = (1.0 - theta_prev) * state.momentum + theta_prev * stoch_grad
    if not M.any():
        return X, MuonState(momentum=M, step_index=k + 1)
    eta = schedule(params, k).eta * lr_scale
    direction = linalg.polar_sign(M, polar)
    return X - eta * direction, MuonState(
        momentum=M,
        step_index=k + 1,
        last_rank_used=min(M.shape),
        last_residual=0.0,
    )


def step_sgdm(
    state: SgdmState,
    X: np.ndarray,
    grad: np.ndarray,
    lr: float = 1e-3,
    momentum_coef: float = 0.9,
    weight_decay: float = 0.0,
) -> tuple[np.ndarray, SgdmState]:
    """Heavy-ball SGD: v <- mu v + (g + wd X); X <- X - lr v."""
    d = grad + weight_decay * X if weight_decay else grad
    v = momentum_coef * state.velocity + d
    return X - lr * v, SgdmState(velocity=v)


def step_adamw(
    state: AdamWState,
    X: np.ndarray,
    grad: np.ndarray,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    weight_decay: float = 0.0,
) -> tuple[np.ndarray, AdamWState]:
    """AdamW with bias correction and decoupled weight decay:

    m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
    X <- X - lr * (mhat / (sqrt(vhat) + eps) + wd X)
    """
    t = state.step_count + 1
    m = beta1 * state.exp_avg + (1.0 - beta1) * grad
    v = beta2 * state.exp_avg_sq + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    X_next = X - lr * (m_hat / (np.sqrt(v_hat) + eps) + weight_decay * X)
    return X_next, AdamWState(exp_avg=m, exp_avg_sq=v, step_count=t)


@dataclass(frozen=True)
class TheoryBounds:
    """Problem constants entering the convergence rates.

    L_star is a nuclear-vs-spectral Lipschitz constant of the gradient,
    sigma and alpha describe the noise moment bound E||Z||_F^alpha <=
    sigma^alpha, and rho = min(m, n).
    """

    f_low: float
    L_star: float
    sigma: float = 0.0
    alpha: float = 2.0
    rho: int = 1

    def __post_init__(self) -> None:
        if not (1.0 < self.alpha <= 2.0):
            raise ValueError("alpha must lie in (1, 2]")
        if self.L_star < 0 or self.sigma < 0 or self.rho < 1:
            raise ValueError("L_star, sigma must be >= 0 and rho >= 1")


def u_gd(bounds: TheoryBounds, f_x0: float) -> float:
    """Constant in the safeguarded-GD rate: f(X0) - f_low + L* + 4."""
    return f_x0 - bounds.f_low + bounds.L_star + 4.0


def u_mn(bounds: TheoryBounds, f_x0: float) -> float:
    """Constant in the Muon rate under alpha-heavy-tail noise."""
    a = bounds.alpha
    moment_term = 2.0 * (a - 1.0) * (2.0 * math.sqrt(bounds.rho) / a) ** (a / (a - 1.0))
    return (
        f_x0
        - bounds.f_low
        + bounds.sigma**a
        + 2.0 * bounds.L_star
        + 4.0
        + moment_term
        + 6.0 * bounds.L_star**a
        + 4.0 * bounds.sigma**a
    )


def theory_bounds(bounds: TheoryBounds, f_x0: float, K: int) -> tuple[float, float]:
    """Rate right-hand sides at horizon K (K >= 3 so that ln K > 1).

    Returns (gd_rhs, muon_rhs):

        gd_rhs   = U_gd * ln K / sqrt(K)
        muon_rhs = U_mn * ln K / K^{(a-1)/(3a-2)}

    bounding min_{k<K} of the gradient / expected gradient nuclear norm.
    """
    if K < 3:
        raise ValueError("K must be >= 3")
    log_k = math.log(K)
    a = bounds.alpha
    gd_rhs = u_gd(bounds, f_x0) * log_k / math.sqrt(K)
    muon_rhs = u_mn(bounds, f_x0) * log_k / K ** ((a - 1.0) / (3.0 * a - 2.0))
    return gd_rhs, muon_rhs
