"""Benchmark problems: ill-conditioned matrix regression, near-low-rank
matrices with additive noise, and calibrated stochastic-gradient noise.

The regression objective is ``f(X) = 0.5 ||A X B - C||_F^2`` with planted
parameter X* and geometric singular spectra on A and B, which makes the
problem stiff enough to separate signed methods from entrywise ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import matrixio

__all__ = [
    "MatrixRegressionInstance",
    "gen_matrix_regression",
    "save_instance",
    "load_instance",
    "NearLowRankSpec",
    "gen_near_lowrank",
    "NoiseModel",
    "sample_noise",
    "sample_stoch_grad",
    "empirical_sign_covariance",
]

_NOISE_KINDS = ("none", "gaussian-frobenius", "heavy-tail-pareto")

# Heavy-tail radius: a two-point mixture of a constant and a Pareto tail.
# The tail fires with probability _TAIL_PROB and carries _TAIL_SHARE of the
# calibrated alpha-moment; its exponent is 2 for alpha < 2 (infinite second
# moment) and 4.5 at alpha = 2 (the second moment must be finite there).
_TAIL_PROB = 0.05
_TAIL_SHARE = 0.2


def _haar_columns(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed column-orthogonal factor via sign-fixed QR."""
    Q, R = np.linalg.qr(rng.standard_normal((rows, cols)))
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return Q * d


@dataclass
class MatrixRegressionInstance:
    """Frozen problem data; C = A @ X_star @ B + noise_scale * E."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    X_star: np.ndarray
    E: np.ndarray
    sv_base: float
    noise_scale: float

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def p(self) -> int:
        return self.A.shape[0]

    @property
    def lipschitz_upper(self) -> float:
        """p * ||A||^2 ||B||^2, a nuclear-vs-spectral Lipschitz constant.

        The gradient difference A^T A (X - Y) B B^T has rank at most p, so
        its nuclear norm is at most p times its spectral norm.
        """
        top = self.sv_base**self.p
        return self.p * top**4

    def objective(self, X: np.ndarray) -> float:
        R = self.A @ X @ self.B - self.C
        return 0.5 * float(np.sum(R * R))

    def gradient(self, X: np.ndarray) -> np.ndarray:
        return self.A.T @ (self.A @ X @ self.B - self.C) @ self.B.T


def gen_matrix_regression(
    n: int,
    p: int,
    sv_base: float = 2.0,
    noise_scale: float = 1e-3,
    seed: int = 0,
) -> MatrixRegressionInstance:
    """Instance with singular values sv_base^1 .. sv_base^p on A and B."""
    if not (1 <= p <= n):
        raise ValueError(f"need n >= p >= 1, got n={n}, p={p}")
    if sv_base <= 1.0:
        raise ValueError("sv_base must be > 1")
    rng = np.random.default_rng(seed)
    sv = sv_base ** np.arange(1, p + 1)
    A = (_haar_columns(p, p, rng) * sv) @ _haar_columns(n, p, rng).T
    B = _haar_columns(n, p, rng) @ (sv[:, None] * _haar_columns(p, p, rng).T)
    X_star = rng.standard_normal((n, n))
    E = rng.standard_normal((p, p))
    C = A @ X_star @ B + noise_scale * E
    return MatrixRegressionInstance(
        A=A, B=B, C=C, X_star=X_star, E=E, sv_base=sv_base, noise_scale=noise_scale
    )


def save_instance(inst: MatrixRegressionInstance, path: str | Path) -> None:
    matrixio.save_matrices(
        path,
        {"A": inst.A, "B": inst.B, "C": inst.C, "X_star": inst.X_star, "E": inst.E},
        {"sv_base": inst.sv_base, "noise_scale": inst.noise_scale},
    )


def load_instance(path: str | Path) -> MatrixRegressionInstance:
    mats, scalars = matrixio.load_matrices(path)
    return MatrixRegressionInstance(
        A=mats["A"],
        B=mats["B"],
        C=mats["C"],
        X_star=mats["X_star"],
        E=mats["E"],
        sv_base=float(scalars["sv_base"]),
        noise_scale=float(scalars["noise_scale"]),
    )


@dataclass(frozen=True)
class NearLowRankSpec:
    """n x n matrix with floor(head_frac * n) singular values at head_value
    and the rest at tail_value, random orthogonal singular vectors."""

    n: int = 500
    head_frac: float = 0.1
    head_value: float = 1.0
    tail_value: float = 1e-4

    def __post_init__(self) -> None:
        if self.n < 10:
            raise ValueError("n must be >= 10 so the head is nonempty")
        if not (0.0 < self.head_frac <= 1.0):
            raise ValueError("head_frac must lie in (0, 1]")
        if not (0.0 < self.tail_value < self.head_value):
            raise ValueError("need head_value > tail_value > 0")

    @property
    def head(self) -> int:
        return int(self.head_frac * self.n)


def gen_near_lowrank(spec: NearLowRankSpec, rng: np.random.Generator) -> np.ndarray:
    s = np.full(spec.n, spec.tail_value)
    s[: spec.head] = spec.head_value
    U = _haar_columns(spec.n, spec.n, rng)
    V = _haar_columns(spec.n, spec.n, rng)
    return (U * s) @ V.T


@dataclass(frozen=True)
class NoiseModel:
    """Additive gradient noise with a calibrated alpha-moment.

    "gaussian-frobenius": iid entries scaled so E||Z||_F^2 = sigma^2.
    "heavy-tail-pareto": Z = sign * R * D with D a uniform unit-Frobenius
    direction and R a mixed constant/Pareto radius with E[R^alpha] =
    sigma^alpha; for alpha < 2 the second moment is infinite.
    """

    kind: str = "none"
    sigma: float = 0.0
    alpha: float = 2.0

    def __post_init__(self) -> None:
        if self.kind not in _NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not (1.0 < self.alpha <= 2.0):
            raise ValueError("alpha must lie in (1, 2]")


def _radius_params(model: NoiseModel) -> tuple[float, float, float]:
    """(tail_exponent, pareto_scale, bounded_value) calibrating E[R^alpha]."""
    beta = 2.0 if model.alpha < 2.0 else 4.5
    s = model.sigma * (
        _TAIL_SHARE * (beta - model.alpha) / (_TAIL_PROB * beta)
    ) ** (1.0 / model.alpha)
    b = model.sigma * ((1.0 - _TAIL_SHARE) / (1.0 - _TAIL_PROB)) ** (1.0 / model.alpha)
    return beta, s, b


def sample_noise(
    model: NoiseModel, shape: tuple[int, int], rng: np.random.Generator
) -> np.ndarray:
    """One noise matrix; ||Z||_F equals the drawn radius exactly."""
    if model.kind == "none" or model.sigma == 0.0:
        return np.zeros(shape)
    if model.kind == "gaussian-frobenius":
        scale = model.sigma / math.sqrt(shape[0] * shape[1])
        return scale * rng.standard_normal(shape)
    beta, s, b = _radius_params(model)
    is_tail = rng.random() < _TAIL_PROB
    pareto_draw = s * (1.0 + rng.pareto(beta))
    radius = pareto_draw if is_tail else b
    sign = 1.0 if rng.random() < 0.5 else -1.0
    D = rng.standard_normal(shape)
    return (sign * radius / np.linalg.norm(D)) * D


def sample_stoch_grad(
    inst: MatrixRegressionInstance,
    X: np.ndarray,
    noise: NoiseModel,
    rng: np.random.Generator,
) -> np.ndarray:
    """Exact gradient plus one draw of the noise model."""
    g = inst.gradient(X)
    if noise.kind == "none" or noise.sigma == 0.0:
        return g
    return g + sample_noise(noise, g.shape, rng)


def empirical_sign_covariance(
    M: np.ndarray,
    noise_var: float,
    trials: int,
    estimator: Callable[[np.ndarray, np.random.Generator], np.ndarray],
    rng: np.random.Generator,
) -> float:
    """Trace of the entrywise covariance of an orthogonalization estimator.

    Each trial perturbs M with iid N(0, noise_var) entries, applies the
    estimator (which may itself consume randomness, e.g. a fresh sketch),
    and the unbiased per-entry variance is summed over all entries:
    sum_t ||est_t - mean||_F^2 / (trials - 1).
    """
    if trials < 2:
        raise ValueError("trials must be >= 2")
    if noise_var < 0:
        raise ValueError("noise_var must be >= 0")
    scale = math.sqrt(noise_var)
    total = np.zeros_like(M)
    total_sq = np.zeros_like(M)
    for _ in range(trials):
        noisy = M + scale * rng.standard_normal(M.shape) if scale else M
        est = estimator(noisy, rng)
        total += est
        total_sq += est * est
    var = (total_sq - total * total / trials) / (trials - 1)
    return float(np.maximum(var, 0.0).sum())
