"""Low-rank matrix orthogonalization and matrix-signed optimization.

The package computes cheap low-rank estimates of the matrix sign factor
msgn(M) = U V^T (the orthogonal polar factor of the reduced SVD) via
randomized sketching, and builds stochastic optimizers on top of them:
signed gradient descent with a fixed or adaptively safeguarded sketch
rank, and a low-rank variant of the Muon momentum update with heavy-tail
noise schedules.  Synthetic benchmark problems plus an experiment harness
(`bench` CLI) round out the desk-scale studies.
"""

from . import linalg, matrixio, optimizers, orthogonalize, problems
from .linalg import (
    MatrixNorms,
    PolarConfig,
    SvdFactors,
    best_rank_k,
    msgn_exact,
    newton_schulz,
    norms,
    polar_sign,
    qr_thin,
)
from .optimizers import (
    AdamWState,
    MuonState,
    ScheduleParams,
    SgdmState,
    StepSizes,
    TheoryBounds,
    schedule,
    step_adamw,
    step_fixed_rank_gd,
    step_lowrank_muon,
    step_safeguarded_gd,
    step_sgdm,
    step_vanilla_muon,
    theory_bounds,
)
from .orthogonalize import (
    LowRankSign,
    SafeguardPolicy,
    SketchSpec,
    column_probabilities,
    residual_nuclear,
    safeguarded_sketch,
    sketch_sign,
    sketch_sign_column_select,
    sketch_sign_gaussian,
    sketch_sign_power,
    truncated_svd,
)
from .problems import (
    MatrixRegressionInstance,
    NearLowRankSpec,
    NoiseModel,
    empirical_sign_covariance,
    gen_matrix_regression,
    gen_near_lowrank,
    load_instance,
    sample_noise,
    sample_stoch_grad,
    save_instance,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "linalg",
    "matrixio",
    "optimizers",
    "orthogonalize",
    "problems",
    "MatrixNorms",
    "PolarConfig",
    "SvdFactors",
    "best_rank_k",
    "msgn_exact",
    "newton_schulz",
    "norms",
    "polar_sign",
    "qr_thin",
    "LowRankSign",
    "SafeguardPolicy",
    "SketchSpec",
    "column_probabilities",
    "residual_nuclear",
    "safeguarded_sketch",
    "sketch_sign",
    "sketch_sign_column_select",
    "sketch_sign_gaussian",
    "sketch_sign_power",
    "truncated_svd",
    "AdamWState",
    "MuonState",
    "ScheduleParams",
    "SgdmState",
    "StepSizes",
    "TheoryBounds",
    "schedule",
    "step_adamw",
    "step_fixed_rank_gd",
    "step_lowrank_muon",
    "step_safeguarded_gd",
    "step_sgdm",
    "step_vanilla_muon",
    "theory_bounds",
    "MatrixRegressionInstance",
    "NearLowRankSpec",
    "NoiseModel",
    "empirical_sign_covariance",
    "gen_matrix_regression",
    "gen_near_lowrank",
    "load_instance",
    "sample_noise",
    "sample_stoch_grad",
    "save_instance",
]
