import math

import numpy as np
import pytest

from stochcca import (AlsConfig, AlsState, NumericFailure, SolveBudget,
                      als_outer_step, appgrad_step, exact_solution,
                      planted_dataset, run_als, run_exact_als,
                      theorem2_schedule, warm_start_gap)


def theorem2_expected(eta, rho1, rho2, rho_r, mu):
    # independent evaluation of the schedule formulas
    T = max(1, math.ceil(rho1 ** 2 / (rho1 ** 2 - rho2 ** 2)
                         * math.log(2.0 / (mu * eta))))
    r = 2 * rho1 / rho_r
    eps = eta ** 2 * rho_r ** 2 / 128.0 * ((r - 1) / (r ** T - 1)) ** 2
    return T, eps


def test_theorem2_schedule_worked_example():
    T, eps = theorem2_schedule(0.01, 0.9, 0.5, 0.5, 0.5)
    assert T == 9
    wT, weps = theorem2_expected(0.01, 0.9, 0.5, 0.5, 0.5)
    assert T == wT
    assert eps == pytest.approx(weps, rel=1e-12)
    # frozen value of the formula evaluation at T = 9
    assert eps == pytest.approx(1.2802081164694087e-16, rel=1e-9)


def test_theorem2_schedule_degenerate_eta():
    # mu * eta at the 2/(mu eta) = 1 boundary: minimal T is clamped to 1
    T, eps = theorem2_schedule(0.999999, 0.9, 0.5, 0.5, 1.0)
    assert T >= 1


def test_theorem2_schedule_rank_one():
    T, eps = theorem2_schedule(0.05, 0.8, 0.3, 0.8, 0.5)
    r = 2.0
    want = 0.05 ** 2 * 0.64 / 128.0 * ((r - 1) / (r ** T - 1)) ** 2
    assert eps == pytest.approx(want, rel=1e-12)


def test_theorem2_schedule_zero_gap():
    with pytest.raises((NumericFailure, ValueError)):
        theorem2_schedule(0.1, 0.7, 0.7, 0.5, 0.5)


@pytest.fixture
def planted():
    ds = planted_dataset([0.85, 0.4], 4, 4, 120, gamma=1e-3, seed=21)
    return ds, exact_solution(ds)


def test_outer_step_exact_inner_matches_exact_als(planted):
    ds, ref = planted
    rng = np.random.default_rng(0)
    u0 = rng.standard_normal(4)
    v0 = rng.standard_normal(4)
    ex_state, ex_trace = run_exact_als(ds, u0=u0, v0=v0, steps=3, reference=ref)

    from stochcca.reference import normalized_init
    u, v = normalized_init(ds, u0=u0, v0=v0)
    state = AlsState(u, v, u.copy(), v.copy())
    for _ in range(3):
        state = als_outer_step(state, ds, epsilon=None, inner="exact",
                               budget=SolveBudget.fixed_epochs(1))
    np.testing.assert_allclose(np.abs(state.u), np.abs(ex_state.u), atol=1e-8)
    np.testing.assert_allclose(np.abs(state.v), np.abs(ex_state.v), atol=1e-8)


def test_outer_step_fixed_point_at_optimum(planted):
    ds, ref = planted
    state = AlsState(ref.u_star, ref.v_star, ref.u_star.copy(), ref.v_star.copy())
    new = als_outer_step(state, ds, epsilon=1e-12, inner="svrg",
                         rng_f=np.random.default_rng(0), rng_g=np.random.default_rng(1))
    align_u = ds.sxx.bilinear(new.u, ref.u_star) ** 2
    align_v = ds.syy.bilinear(new.v, ref.v_star) ** 2
    assert min(align_u, align_v) >= 1 - 1e-5


def test_single_gd_step_reproduces_appgrad():
    ds = planted_dataset([0.8, 0.5], 3, 3, 60, gamma=0.0, seed=5)
    rng = np.random.default_rng(2)
    u = rng.standard_normal(3)
    v = rng.standard_normal(3)
    from stochcca.reference import normalized_init
    u, v = normalized_init(ds, u0=u, v0=v)
    xi = 0.37
    state_als = AlsState(u, v, u.copy(), v.copy())
    state_app = AlsState(u, v, u.copy(), v.copy())
    for _ in range(5):
        state_als = als_outer_step(state_als, ds, epsilon=None, inner="gd",
                                   budget=SolveBudget.fixed_epochs(1, step_size=xi))
        state_app = appgrad_step(state_app, ds, xi)
        np.testing.assert_allclose(state_als.u_tilde, state_app.u_tilde, atol=1e-12)
        np.testing.assert_allclose(state_als.v_tilde, state_app.v_tilde, atol=1e-12)
        np.testing.assert_allclose(state_als.u, state_app.u, atol=1e-12)


def test_run_als_zero_steps_returns_init(planted):
    ds, ref = planted
    cfg = AlsConfig(inner="svrg", epsilon_mode="fixed", epsilon=1e-8, T=0, seed=3)
    res = run_als(ds, cfg, reference=ref)
    assert len(res.trace) == 1
    assert ds.sxx.quadratic_form(res.u) == pytest.approx(1.0, abs=1e-10)


def test_run_als_normalization_invariant(planted):
    ds, ref = planted
    cfg = AlsConfig(inner="svrg", epsilon_mode="geometric", T=8, seed=4)
    res = run_als(ds, cfg, reference=ref)
    for row in res.trace.rows[1:]:
        assert abs(row.constraint_u - 1.0) <= 1e-8
        assert abs(row.constraint_v - 1.0) <= 1e-8


def test_run_als_theorem_mode_reaches_eta(planted):
    ds, ref = planted
    cfg = AlsConfig(inner="svrg", eta=0.05, epsilon_mode="theorem", seed=5)
    res = run_als(ds, cfg, reference=ref)
    last = res.trace.final
    assert min(last.align_u, last.align_v) >= 1 - 0.05
    assert last.objective >= ref.rho[0] * (1 - 2 * 0.05)


def test_run_als_oracle_equivalence_trace(planted):
    ds, ref = planted
    cfg = AlsConfig(inner="exact", epsilon_mode="fixed", epsilon=1e-15, T=6, seed=6)
    res = run_als(ds, cfg, reference=ref)
    # replay exact ALS from the same initialization
    from stochcca.reference import sign_aligned_init
    seq = np.random.SeedSequence(6)
    rng_init = np.random.default_rng(seq.spawn(1)[0])
    u0, v0 = sign_aligned_init(ds, ref, rng=rng_init)
    _, ex_trace = run_exact_als(ds, u0=u0, v0=v0, steps=6, reference=ref)
    for row, ex in zip(res.trace.rows, ex_trace):
        assert row.objective == pytest.approx(ex.objective, abs=1e-8)
        assert row.align_u == pytest.approx(ex.align_u, abs=1e-8)
        assert row.align_v == pytest.approx(ex.align_v, abs=1e-8)


def test_run_als_fixed_epsilon_high_accuracy(planted):
    ds, ref = planted
    cfg = AlsConfig(inner="svrg", epsilon_mode="fixed", epsilon=1e-12, T=40, seed=7)
    res = run_als(ds, cfg, reference=ref)
    assert res.trace.final.suboptimality <= 1e-6


def test_warm_start_gap_bounds(planted):
    ds, ref = planted
    eps = 1e-6
    bound = 0.5 * (math.sqrt(2 * eps) + 2.0) ** 2
    for seed in range(3):
        cfg = AlsConfig(inner="svrg", epsilon_mode="fixed", epsilon=eps, T=1, seed=seed)
        res = run_als(ds, cfg, reference=ref)
        state = res.state
        # t = 1 warm start: bound is 2 (norm bounded by 1 + rho1 <= 2)
        init = AlsState(state.u, state.v, state.u.copy(), state.v.copy())
        gap1 = warm_start_gap(AlsState(res.u, res.v,
                                       res.u.copy(), res.v.copy()), ds)
        assert gap1 <= 2.0 + 1e-9

    cfg = AlsConfig(inner="svrg", epsilon_mode="fixed", epsilon=eps, T=10, seed=11)
    # measure the warm-start gap before every step of a longer run
    from stochcca.reference import sign_aligned_init
    seq = np.random.SeedSequence(11)
    u, v = sign_aligned_init(ds, ref, rng=np.random.default_rng(seq.spawn(1)[0]))
    state = AlsState(u, v, u.copy(), v.copy())
    for t in range(10):
        gap = warm_start_gap(state, ds)
        assert gap <= bound
        state = als_outer_step(state, ds, epsilon=eps, inner="svrg",
                               rng_f=np.random.default_rng(t),
                               rng_g=np.random.default_rng(100 + t))


def test_warm_start_gap_zero_at_optimum(planted):
    ds, ref = planted
    state = AlsState(ref.u_star, ref.v_star, ref.u_star.copy(), ref.v_star.copy())
    # u~ = u* is the exact minimizer of f_1 up to the power-iteration residual
    assert warm_start_gap(state, ds) <= 0.05
