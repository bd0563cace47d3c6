"""Optimizer steps, schedules, and the theoretical rate constants."""

import math

import numpy as np
import pytest

from sketchsign import linalg, optimizers
from sketchsign.linalg import PolarConfig
from sketchsign.optimizers import (
    AdamWState,
    MuonState,
    ScheduleParams,
    SgdmState,
    TheoryBounds,
)
from sketchsign.orthogonalize import SafeguardPolicy, SketchSpec


def test_schedule_fixed_rank():
    params = ScheduleParams(kind="fixed-rank-gd")
    assert optimizers.schedule(params, 0) == (1.0, None, None)
    assert optimizers.schedule(params, 3).eta == 0.5
    with pytest.raises(ValueError):
        optimizers.schedule(params, -1)


def test_schedule_safeguarded_ties_eta_delta():
    params = ScheduleParams(kind="safeguarded-gd")
    sizes = optimizers.schedule(params, 8)
    assert sizes.eta == sizes.delta == 1.0 / 3.0
    assert sizes.theta is None


def test_schedule_muon_alpha2_exact_values():
    """alpha = 2 at k = 15 gives (1/8, 1/4, 1/2) with no rounding at all."""
    sizes = optimizers.schedule(ScheduleParams(kind="muon-heavy-tail", alpha=2.0), 15)
    assert sizes == (0.125, 0.25, 0.5)


def test_schedule_muon_general_alpha():
    a = 1.5
    sizes = optimizers.schedule(ScheduleParams(kind="muon-heavy-tail", alpha=a), 4)
    t, d = 5.0, 3 * a - 2
    assert sizes.eta == pytest.approx(t ** (-(2 * a - 1) / d))
    assert sizes.theta == pytest.approx(t ** (-a / d))
    assert sizes.delta == pytest.approx(t ** (-(a - 1) / d))


def test_schedule_params_validation():
    with pytest.raises(ValueError):
        ScheduleParams(kind="cosine")
    with pytest.raises(ValueError):
        ScheduleParams(kind="muon-heavy-tail", alpha=1.0)
    with pytest.raises(ValueError):
        ScheduleParams(kind="muon-heavy-tail", alpha=2.5)
    ScheduleParams(kind="muon-heavy-tail", alpha=2.0)  # boundary allowed


def test_fixed_rank_gd_one_step_is_sign_of_target():
    """For f(X) = 0.5||X - T||_F^2 from X = 0, the first step lands on msgn(T)."""
    rng = np.random.default_rng(0)
    T = rng.standard_normal((9, 6))
    grad = -T  # gradient of f at X = 0
    X1, sign = optimizers.step_fixed_rank_gd(
        np.zeros((9, 6)), grad, 0, SketchSpec(rank=6), rng
    )
    assert sign is not None
    assert np.allclose(X1, linalg.msgn_exact(T), atol=1e-10)


def test_fixed_rank_gd_zero_gradient_noop():
    X = np.ones((4, 4))
    X1, sign = optimizers.step_fixed_rank_gd(
        X, np.zeros((4, 4)), 5, SketchSpec(rank=2), np.random.default_rng(1)
    )
    assert sign is None
    assert X1 is X


def test_signed_steps_respect_spectral_cap():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((12, 8))
    for k in (0, 2, 7):
        grad = rng.standard_normal((12, 8))
        X1, _ = optimizers.step_fixed_rank_gd(X, grad, k, SketchSpec(rank=3), rng)
        eta = optimizers.schedule(ScheduleParams(kind="fixed-rank-gd"), k).eta
        assert np.linalg.norm(X1 - X, 2) <= eta * (1 + 1e-10)


def test_safeguarded_gd_certifies_residual():
    rng = np.random.default_rng(3)
    grad = rng.standard_normal((14, 3)) @ rng.standard_normal((3, 10))
    policy = SafeguardPolicy(r0=1)
    X = np.zeros((14, 10))
    for k in (0, 15, 99):
        _, sign = optimizers.step_safeguarded_gd(X, grad, k, policy, SketchSpec(rank=1), rng)
        delta = optimizers.schedule(ScheduleParams(kind="safeguarded-gd"), k).delta
        resid = np.linalg.svd(grad - sign.Q @ (sign.Q.T @ grad), compute_uv=False).sum()
        assert resid <= delta + 1e-12


def test_safeguarded_gd_direction_exact_when_delta_tiny():
    rng = np.random.default_rng(4)
    grad = rng.standard_normal((10, 2)) @ rng.standard_normal((2, 8))
    X = np.zeros((10, 8))
    X1, sign = optimizers.step_safeguarded_gd(
        X, grad, 10_000, SafeguardPolicy(r0=1), SketchSpec(rank=1), rng
    )
    assert sign.r_used >= 2
    eta = optimizers.schedule(ScheduleParams(kind="safeguarded-gd"), 10_000).eta
    assert np.allclose(X1, -eta * linalg.msgn_exact(grad), atol=1e-8)


def test_muon_first_step_uses_sample_directly():
    rng = np.random.default_rng(5)
    g = rng.standard_normal((7, 5))
    state = MuonState.initial((7, 5))
    _, state = optimizers.step_lowrank_muon(
        state, np.zeros((7, 5)), g, 0, base=SketchSpec(rank=5), rng=rng
    )
    assert np.array_equal(state.momentum, g)
    assert state.step_index == 1


def test_muon_momentum_recursion():
    rng = np.random.default_rng(6)
    g0 = rng.standard_normal((6, 4))
    g1 = rng.standard_normal((6, 4))
    state = MuonState.initial((6, 4))
    X = np.zeros((6, 4))
    X, state = optimizers.step_lowrank_muon(state, X, g0, 0, base=SketchSpec(rank=4), rng=rng)
    X, state = optimizers.step_lowrank_muon(state, X, g1, 1, base=SketchSpec(rank=4), rng=rng)
    theta0 = optimizers.schedule(ScheduleParams(kind="muon-heavy-tail", alpha=2.0), 0).theta
    assert np.allclose(state.momentum, (1 - theta0) * g0 + theta0 * g1)


def test_muon_step_index_mismatch_rejected():
    state = MuonState.initial((3, 3))
    with pytest.raises(ValueError, match="step"):
        optimizers.step_lowrank_muon(
            state, np.zeros((3, 3)), np.eye(3), 4,
            base=SketchSpec(rank=2), rng=np.random.default_rng(7),
        )


def test_muon_zero_momentum_skips():
    state = MuonState.initial((3, 3))
    X = np.ones((3, 3))
    X1, state = optimizers.step_lowrank_muon(
        state, X, np.zeros((3, 3)), 0, base=SketchSpec(rank=2),
        rng=np.random.default_rng(8),
    )
    assert np.array_equal(X1, X)
    assert state.step_index == 1


def test_muon_momentum_ignores_sketch_randomness():
    rng = np.random.default_rng(9)
    samples = [rng.standard_normal((8, 6)) for _ in range(4)]
    finals = []
    for sketch_seed in (123, 456):
        state = MuonState.initial((8, 6))
        X = np.zeros((8, 6))
        for k, g in enumerate(samples):
            X, state = optimizers.step_lowrank_muon(
                state, X, g, k, base=SketchSpec(rank=2),
                rng=np.random.default_rng(sketch_seed + k),
            )
        finals.append(state.momentum)
    assert np.array_equal(finals[0], finals[1])


def test_vanilla_muon_scale_invariant_step():
    rng = np.random.default_rng(10)
    g = rng.standard_normal((6, 6))
    X = np.zeros((6, 6))
    a, _ = optimizers.step_vanilla_muon(MuonState.initial((6, 6)), X, g, 0)
    b, _ = optimizers.step_vanilla_muon(MuonState.initial((6, 6)), X, 7.5 * g, 0)
    assert np.allclose(a, b, atol=1e-12)


def test_lowrank_muon_full_rank_matches_vanilla():
    rng = np.random.default_rng(11)
    samples = [rng.standard_normal((9, 9)) for _ in range(5)]
    X_lr = np.zeros((9, 9))
    X_full = np.zeros((9, 9))
    s_lr = MuonState.initial((9, 9))
    s_full = MuonState.initial((9, 9))
    for k, g in enumerate(samples):
        X_lr, s_lr = optimizers.step_lowrank_muon(
            s_lr, X_lr, g, k, base=SketchSpec(rank=9),
            rng=np.random.default_rng([12, k]), policy=SafeguardPolicy(r0=9),
        )
        X_full, s_full = optimizers.step_vanilla_muon(s_full, X_full, g, k)
        assert np.allclose(X_lr, X_full, atol=1e-10)


def test_sgdm_plain_step_without_momentum():
    rng = np.random.default_rng(13)
    X = rng.standard_normal((5, 4))
    g = rng.standard_normal((5, 4))
    X1, _ = optimizers.step_sgdm(SgdmState.initial((5, 4)), X, g, lr=0.1, momentum_coef=0.0)
    assert np.allclose(X1, X - 0.1 * g)


def test_sgdm_two_equal_steps_momentum_09():
    g = np.full((3, 3), 2.0)
    X = np.zeros((3, 3))
    state = SgdmState.initial((3, 3))
    X, state = optimizers.step_sgdm(state, X, g, lr=0.01, momentum_coef=0.9)
    X_prev = X.copy()
    X, state = optimizers.step_sgdm(state, X, g, lr=0.01, momentum_coef=0.9)
    # second displacement is lr * g * (1 + 0.9)
    assert np.allclose(X_prev - X, 0.01 * g * 1.9)


def test_sgdm_lr_zero_noop():
    X = np.ones((2, 2))
    X1, _ = optimizers.step_sgdm(SgdmState.initial((2, 2)), X, np.ones((2, 2)), lr=0.0)
    assert np.array_equal(X1, X)


def test_adamw_zero_gradient_behavior():
    X = np.full((3, 2), 4.0)
    zero = np.zeros((3, 2))
    X1, _ = optimizers.step_adamw(AdamWState.initial((3, 2)), X, zero, lr=0.01)
    assert np.array_equal(X1, X)
    X2, _ = optimizers.step_adamw(
        AdamWState.initial((3, 2)), X, zero, lr=0.01, weight_decay=0.5
    )
    assert np.allclose(X2, X * (1 - 0.01 * 0.5))


def test_adamw_constant_gradient_saturates_to_lr_sign():
    g = np.array([[3.0, -0.2], [0.5, -7.0]])
    X = np.zeros((2, 2))
    state = AdamWState.initial((2, 2))
    for _ in range(300):
        X_prev = X.copy()
        X, state = optimizers.step_adamw(state, X, g, lr=1e-3)
    step = X_prev - X
    assert np.allclose(step, 1e-3 * np.sign(g), rtol=1e-3)


def test_theory_constants():
    b = TheoryBounds(f_low=0.0, L_star=1.0, sigma=0.0, alpha=2.0, rho=4)
    assert optimizers.u_gd(b, 0.0) == 5.0
    assert optimizers.u_mn(b, 0.0) == 20.0
    gd_rhs, mn_rhs = optimizers.theory_bounds(b, 0.0, 100)
    assert gd_rhs == pytest.approx(5.0 * math.log(100) / 10.0)
    assert mn_rhs == pytest.approx(20.0 * math.log(100) / 100 ** 0.25)
    with pytest.raises(ValueError):
        optimizers.theory_bounds(b, 0.0, 2)


def test_theory_bounds_validation():
    with pytest.raises(ValueError):
        TheoryBounds(f_low=0.0, L_star=-1.0)
    with pytest.raises(ValueError):
        TheoryBounds(f_low=0.0, L_star=1.0, alpha=1.0)
    with pytest.raises(ValueError):
        TheoryBounds(f_low=0.0, L_star=1.0, rho=0)
    with pytest.raises(ValueError):
        TheoryBounds(f_low=0.0, L_star=1.0, sigma=-1.0)
