"""Low-rank orthogonalization: sketch the range, then sign the small factor.

Given M (m x n) and a rank budget r, build a column-orthogonal Q (m x r')
whose span approximates range(M), then set ``S = msgn(Q.T @ M)``.  The
product ``Q @ S`` equals ``msgn(Q Q^T M)`` exactly, so the pair (Q, S) is a
low-rank orthogonalization of M computed without touching an m x n SVD.
Three range finders are provided (Gaussian sketch, norm-weighted column
selection, inverse-free power iteration) plus a safeguarded wrapper that
grows the rank until a residual certificate passes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import linalg
from .linalg import PolarConfig

__all__ = [
    "SketchSpec",
    "LowRankSign",
    "SafeguardPolicy",
    "sketch_sign",
    "sketch_sign_gaussian",
    "sketch_sign_column_select",
    "sketch_sign_power",
    "column_probabilities",
    "residual_nuclear",
    "safeguarded_sketch",
    "truncated_svd",
]

_METHODS = ("gaussian", "column-select", "power")
_RESIDUAL_MODES = ("exact-nuclear", "frobenius-upper")


@dataclass(frozen=True)
class SketchSpec:
    """Rank budget and method for one sketch-sign computation.

    power_q is the number of (M M^T) passes for the power method; q = 0
    reproduces the plain Gaussian sketch draw-for-draw.
    """

    method: str = "gaussian"
    rank: int = 8
    power_q: int = 0
    polar: PolarConfig = PolarConfig()

    def __post_init__(self) -> None:
        if self.method not in _METHODS:
            raise ValueError(f"unknown sketch method {self.method!r}")
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if self.power_q < 0:
            raise ValueError("power_q must be >= 0")


@dataclass
class LowRankSign:
    """Factor pair: ``dense() = Q @ S`` is the low-rank sign estimate.

    residual_nuclear bounds ``||M - Q Q^T M||_*``; it is the exact value
    when residual_is_upper_bound is False and ``sqrt(rho) * ||.||_F``
    otherwise.
    """

    Q: np.ndarray
    S: np.ndarray
    r_used: int
    residual_nuclear: float
    residual_is_upper_bound: bool

    def dense(self) -> np.ndarray:
        return self.Q @ self.S


@dataclass(frozen=True)
class SafeguardPolicy:
    """Rank escalation rule for the safeguarded sketch.

    Start at r0, redraw up to max_redraws times per level, then grow the
    rank geometrically (capped at min(m, n), where the residual vanishes).
    """

    r0: int = 8
    growth_factor: float = 2.0
    max_redraws: int = 1
    residual_mode: str = "exact-nuclear"

    def __post_init__(self) -> None:
        if self.r0 < 1:
            raise ValueError("r0 must be >= 1")
        if self.growth_factor <= 1.0:
            raise ValueError("growth_factor must be > 1")
        if self.max_redraws < 0:
            raise ValueError("max_redraws must be >= 0")
        if self.residual_mode not in _RESIDUAL_MODES:
            raise ValueError(f"unknown residual mode {self.residual_mode!r}")


def _checked_input(M: np.ndarray, rank: int) -> tuple[np.ndarray, int]:
    A = linalg._as_matrix(M)
    if not A.any():
        raise ValueError("cannot orthogonalize a zero matrix")
    rho = min(A.shape)
    if rank > rho:
        warnings.warn(
            f"sketch rank {rank} exceeds min(m, n) = {rho}; clamping",
            stacklevel=3,
        )
        rank = rho
    return A, rank


def _range_finder(
    M: np.ndarray, rank: int, power_q: int, rng: np.random.Generator
) -> np.ndarray:
    """Q = qr((M M^T)^q M G) with a re-orthogonalization after every multiply."""
    G = linalg.gaussian_matrix(M.shape[1], rank, rng)
    Y = M @ G
    for _ in range(power_q):
        Z = M.T @ linalg.qr_thin(Y)
        Y = M @ linalg.qr_thin(Z)
    return linalg.qr_thin(Y)


def _find_range(
    M: np.ndarray, rank: int, spec: SketchSpec, rng: np.random.Generator
) -> np.ndarray:
    """Range finder for spec.method at an explicit rank (checked input)."""
    if spec.method == "column-select":
        p = column_probabilities(M)
        idx = rng.choice(M.shape[1], size=rank, replace=True, p=p)
        return linalg.qr_thin(M[:, idx] / np.sqrt(rank * p[idx]))
    q = spec.power_q if spec.method == "power" else 0
    return _range_finder(M, rank, q, rng)


def _finish(M: np.ndarray, Q: np.ndarray, polar: PolarConfig) -> LowRankSign:
    S = linalg.polar_sign(Q.T @ M, polar)
    value, ub = residual_nuclear(M, Q, mode="frobenius-upper")
    return LowRankSign(
        Q=Q,
        S=S,
        r_used=Q.shape[1],
        residual_nuclear=value,
        residual_is_upper_bound=ub,
    )


def sketch_sign_gaussian(
    M: np.ndarray, spec: SketchSpec, rng: np.random.Generator
) -> LowRankSign:
    """Gaussian sketch: Q from qr(M G), then S = sign(Q^T M)."""
    A, rank = _checked_input(M, spec.rank)
    Q = _range_finder(A, rank, 0, rng)
    return _finish(A, Q, spec.polar)


def sketch_sign_power(
    M: np.ndarray, spec: SketchSpec, rng: np.random.Generator
) -> LowRankSign:
    """Power-iteration sketch: q passes of M M^T sharpen the captured range."""
    A, rank = _checked_input(M, spec.rank)
    Q = _range_finder(A, rank, spec.power_q, rng)
    return _finish(A, Q, spec.polar)


def column_probabilities(M: np.ndarray) -> np.ndarray:
    """Sampling weights p_i = ||column i||^2 / ||M||_F^2 (sums to 1)."""
    A = linalg._as_matrix(M)
    sq = np.sum(A * A, axis=0)
    total = sq.sum()
    if total == 0.0:
        raise ValueError("cannot orthogonalize a zero matrix")
    return sq / total


def sketch_sign_column_select(
    M: np.ndarray, spec: SketchSpec, rng: np.random.Generator
) -> LowRankSign:
    """Column-selection sketch: norm-weighted columns with replacement.

    The t-th selected column is rescaled by 1/sqrt(r p_i) so that C C^T is
    an unbiased estimate of M M^T; duplicates simply lower the used rank.
    """
    A, rank = _checked_input(M, spec.rank)
    Q = _find_range(A, rank, replace(spec, method="column-select"), rng)
    return _finish(A, Q, spec.polar)


def sketch_sign(
    M: np.ndarray, spec: SketchSpec, rng: np.random.Generator
) -> LowRankSign:
    """Dispatch on spec.method."""
    if spec.method == "gaussian":
        return sketch_sign_gaussian(M, spec, rng)
    if spec.method == "column-select":
        return sketch_sign_column_select(M, spec, rng)
    return sketch_sign_power(M, spec, rng)


def residual_nuclear(
    M: np.ndarray, Q: np.ndarray, mode: str = "exact-nuclear"
) -> tuple[float, bool]:
    """Nuclear norm of the uncaptured part ``M - Q Q^T M``.

    Returns (value, is_upper_bound).  "exact-nuclear" sums the residual's
    singular values; "frobenius-upper" returns sqrt(min(m, n)) * ||.||_F,
    which costs one matrix product instead of an SVD.
    """
    if mode not in _RESIDUAL_MODES:
        raise ValueError(f"unknown residual mode {mode!r}")
    A = linalg._as_matrix(M)
    if Q.shape[1] == 0:
        R = A
    else:
        R = A - Q @ (Q.T @ A)
    if mode == "frobenius-upper":
        rho = min(A.shape)
        return float(math.sqrt(rho) * np.linalg.norm(R)), True
    s = np.linalg.svd(R, compute_uv=False)
    return float(s.sum()), False


def safeguarded_sketch(
    M: np.ndarray,
    delta: float,
    policy: SafeguardPolicy,
    base: SketchSpec,
    rng: np.random.Generator,
) -> LowRankSign:
    """Sketch with a certified residual: grow the rank until it is <= delta.

    Each level gets one draw plus policy.max_redraws redraws; failing that,
    the rank grows by policy.growth_factor (capped at min(m, n), where the
    captured range is complete and the attempt is accepted outright).  The
    returned residual_nuclear is the accepted certificate value.
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    A, _ = _checked_input(M, 1)
    rho = min(A.shape)
    r = min(policy.r0, rho)
    while True:
        attempts = 1 if r == rho else 1 + policy.max_redraws
        for _ in range(attempts):
            Q = _find_range(A, r, base, rng)
            value, ub = residual_nuclear(A, Q, mode=policy.residual_mode)
            if value <= delta or r == rho:
                S = linalg.polar_sign(Q.T @ A, base.polar)
                return LowRankSign(
                    Q=Q,
                    S=S,
                    r_used=Q.shape[1],
                    residual_nuclear=value,
                    residual_is_upper_bound=ub,
                )
        r = min(rho, max(r + 1, math.ceil(policy.growth_factor * r)))


def truncated_svd(
    M: np.ndarray, rank: int, power_q: int, rng: np.random.Generator
) -> linalg.SvdFactors:
    """Randomized truncated SVD (range finder + small exact SVD).

    Timing baseline: estimates the sign as ``U @ V.T`` after discarding the
    small singular values, the classical route the sketch-sign pair avoids.
    """
    A, rank = _checked_input(M, rank)
    Q = _range_finder(A, rank, power_q, rng)
    f = linalg.svd_reduced(Q.T @ A)
    return linalg.SvdFactors(U=Q @ f.U, sigma=f.sigma, V=f.V)
