"""Dense matrix kernels: thin QR, reduced SVD, matrix sign, and norms.

Everything here works on real 2-D float64 arrays.  The matrix sign
``msgn(M) = U @ V.T`` (from the reduced SVD) is the closest semi-orthogonal
matrix to ``M`` in Frobenius norm; it is what the sketching and optimizer
layers orthogonalize against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "MUON_NS_COEFFS",
    "STABLE_NS_COEFFS",
    "DEFAULT_NS_COEFFS",
    "PolarConfig",
    "SvdFactors",
    "MatrixNorms",
    "qr_thin",
    "svd_reduced",
    "msgn_exact",
    "newton_schulz",
    "polar_sign",
    "norms",
    "best_rank_k",
    "gaussian_matrix",
]

# Relative cutoff below which a singular value (or pivoted-R diagonal) is
# treated as numerically zero.
RANK_RTOL = 1e-12

# Aggressive quintic step used by Muon-style optimizers: fast inflation of
# small singular values, overshoots (fixed points at ~0.868 and ~1.264) and
# never settles at 1, so it must not be iterated to convergence.
MUON_NS_COEFFS = (3.4445, -4.7750, 2.0315)

# Contractive quintic (15/8, -10/8, 3/8): maps (0, 1] into (0, 1]
# monotonically with p(1) = 1 and p'(1) = 0, so it converges to the sign.
STABLE_NS_COEFFS = (1.875, -1.25, 0.375)

# One aggressive step to lift tiny singular values, then the contractive
# polynomial until the step budget is spent.  The last tuple repeats.
DEFAULT_NS_COEFFS = (MUON_NS_COEFFS, STABLE_NS_COEFFS)


def _as_matrix(M: np.ndarray, name: str = "M") -> np.ndarray:
    A = np.asarray(M, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] == 0 or A.shape[1] == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise ValueError(f"{name} has non-finite entries")
    return A


@dataclass(frozen=True)
class PolarConfig:
    """How to compute the matrix sign of a (usually small) matrix.

    method: "exact-svd" for the SVD route, "newton-schulz" for the
        iterative route.
    ns_steps: number of Newton-Schulz iterations.
    ns_eps: additive Frobenius regularizer used when pre-normalizing.
    ns_coeffs: per-step quintic coefficients (a, b, c); the final tuple is
        reused for any remaining steps.
    """

    method: str = "exact-svd"
    ns_steps: int = 5
    ns_eps: float = 1e-7
    ns_coeffs: tuple[tuple[float, float, float], ...] = DEFAULT_NS_COEFFS

    def __post_init__(self) -> None:
        if self.method not in ("exact-svd", "newton-schulz"):
            raise ValueError(f"unknown polar method {self.method!r}")
        if self.ns_steps < 0:
            raise ValueError("ns_steps must be >= 0")
        if self.ns_eps <= 0:
            raise ValueError("ns_eps must be > 0")
        if not self.ns_coeffs:
            raise ValueError("ns_coeffs must contain at least one (a, b, c) tuple")


@dataclass
class SvdFactors:
    """Reduced SVD ``M = U @ np.diag(sigma) @ V.T`` with rank-truncated width."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.sigma) @ self.V.T


@dataclass(frozen=True)
class MatrixNorms:
    spectral: float
    nuclear: float
    frobenius: float


def qr_thin(M: np.ndarray) -> np.ndarray:
    """Column-pivoted thin QR; returns Q whose width is the numerical rank.

    For full-rank M (m x k, k <= m) this is the usual economy Q with
    ``Q.T @ Q = I`` and ``range(Q) = range(M)``.  Rank-deficient input gets a
    narrower Q: callers treat width < k as a degraded sketch.
    """
    A = _as_matrix(M)
    m, k = A.shape
    if k > m:
        raise ValueError(f"qr_thin expects k <= m, got shape {A.shape}")
    Q, R, _ = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return Q[:, :0]
    rank = int(np.count_nonzero(diag > RANK_RTOL * diag[0]))
    return Q[:, :rank] if rank < k else Q


def svd_reduced(M: np.ndarray) -> SvdFactors:
    """Reduced SVD keeping singular values above ``1e-12 * sigma[0]``."""
    A = _as_matrix(M)
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s[0] == 0.0:
        raise ValueError("zero matrix has no reduced SVD")
    k = int(np.count_nonzero(s > RANK_RTOL * s[0]))
    return SvdFactors(U=U[:, :k], sigma=s[:k], V=Vt[:k].T)


def msgn_exact(M: np.ndarray) -> np.ndarray:
    """Matrix sign ``U @ V.T`` via reduced SVD.

    This is the Frobenius-closest matrix with all nonzero singular values
    equal to 1; it satisfies ``<M, msgn(M)> = ||M||_*``.
    """
    f = svd_reduced(M)
    return f.U @ f.V.T


def newton_schulz(M: np.ndarray, cfg: PolarConfig | None = None) -> np.ndarray:
    """Approximate msgn(M) by quintic Newton-Schulz iterations.

    The iterate is pre-normalized by ``||M||_F + ns_eps`` and updated as
    ``X <- a X + (b A + c A^2) X`` with ``A = X X^T``.  Tall inputs are
    transposed first (msgn commutes with transposition) so the Gram matrix
    stays at the small dimension.
    """
    if cfg is None:
        cfg = PolarConfig(method="newton-schulz")
    A = _as_matrix(M)
    transposed = A.shape[0] > A.shape[1]
    X = A.T if transposed else A
    X = X / (np.linalg.norm(X) + cfg.ns_eps)
    coeffs = cfg.ns_coeffs
    for t in range(cfg.ns_steps):
        a, b, c = coeffs[min(t, len(coeffs) - 1)]
        G = X @ X.T
        X = a * X + (b * G + c * (G @ G)) @ X
    return X.T if transposed else X


def polar_sign(M: np.ndarray, cfg: PolarConfig) -> np.ndarray:
    """Matrix sign of M per the config: exact SVD or Newton-Schulz."""
    if cfg.method == "exact-svd":
        return msgn_exact(M)
    return newton_schulz(M, cfg)


def norms(M: np.ndarray) -> MatrixNorms:
    """(spectral, nuclear, frobenius) from one singular-value computation."""
    A = _as_matrix(M)
    s = np.linalg.svd(A, compute_uv=False)
    return MatrixNorms(
        spectral=float(s[0]),
        nuclear=float(s.sum()),
        frobenius=float(np.sqrt(np.sum(s * s))),
    )


def best_rank_k(M: np.ndarray, k: int) -> np.ndarray:
    """Best rank-k approximation (truncated SVD); k = 0 gives the zero matrix."""
    A = _as_matrix(M)
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return np.zeros_like(A)
    if k >= min(A.shape):
        return A.copy()
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    return (U[:, :k] * s[:k]) @ Vt[:k]


def gaussian_matrix(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Standard normal test matrix drawn from the given generator."""
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    return rng.standard_normal((rows, cols))
