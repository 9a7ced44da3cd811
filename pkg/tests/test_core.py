import numpy as np
import pytest
import scipy.sparse as sp

from stochcca import (CcaDataset, CovarianceOperator, center_columns,
                      condition_numbers, cov_matvec, cov_quadratic_form,
                      evaluate_metrics, exact_solution, planted_dataset)
from conftest import random_dataset


def test_center_columns_examples():
    np.testing.assert_allclose(center_columns([[1.0, 3.0]]), [[-1.0, 1.0]])
    np.testing.assert_allclose(center_columns([[0.0, 0.0], [0.0, 0.0]]),
                               [[0.0, 0.0], [0.0, 0.0]])
    np.testing.assert_allclose(center_columns([[1.0, 2.0, 3.0]]), [[-1.0, 0.0, 1.0]])


def test_center_columns_rejects_empty():
    with pytest.raises(ValueError):
        center_columns(np.empty((0, 0)))


def test_centered_rows_sum_to_zero():
    rng = np.random.default_rng(0)
    ds = random_dataset(rng)
    sums = np.abs(ds.x_view.sum(axis=1))
    assert sums.max() <= 1e-9 * ds.n_samples * max(np.abs(ds.x_view).max(), 1.0)


def test_dataset_validation():
    with pytest.raises(ValueError):
        CcaDataset([[1.0, 2.0]], [[1.0, 2.0, 3.0]])
    with pytest.raises(ValueError):
        CcaDataset([[1.0, 2.0]], [[1.0, 2.0]], gamma_x=-1.0)


def test_cov_matvec_examples():
    # A = [[1, -1]]: Sigma = (1/2)(1 + 1) = 1, plus gamma
    op0 = CcaDataset([[1.0, -1.0]], [[1.0, -1.0]], 0.0, 0.0).sxx
    np.testing.assert_allclose(cov_matvec(op0, [2.0]), [2.0], atol=1e-15)
    op1 = CcaDataset([[1.0, -1.0]], [[1.0, -1.0]], 1.0, 1.0).sxx
    np.testing.assert_allclose(cov_matvec(op1, [1.0]), [2.0], atol=1e-15)
    np.testing.assert_allclose(cov_matvec(op1, [0.0]), [0.0], atol=0)


def test_cov_quadratic_form_examples():
    ds0 = CcaDataset([[1.0, -1.0]], [[1.0, -1.0]], 0.0, 0.0)
    assert cov_quadratic_form(ds0.sxx, [1.0]) == pytest.approx(1.0, abs=1e-15)
    ds1 = CcaDataset([[1.0, -1.0]], [[1.0, -1.0]], 1.0, 1.0)
    assert cov_quadratic_form(ds1.sxx, [1.0]) == pytest.approx(2.0, abs=1e-15)
    assert cov_quadratic_form(ds1.sxx, [0.0]) == 0.0


def test_cov_dimension_mismatch():
    ds = CcaDataset([[1.0, -1.0]], [[1.0, -1.0]])
    with pytest.raises(ValueError):
        cov_matvec(ds.sxx, [1.0, 2.0])
    with pytest.raises(ValueError):
        cov_quadratic_form(ds.sxx, [1.0, 2.0])
    with pytest.raises(ValueError):
        ds.sxy.quadratic_form([1.0])


def test_matvec_matches_dense_100_random():
    rng = np.random.default_rng(1)
    for _ in range(100):
        ds = random_dataset(rng)
        op = rng.choice([ds.sxx, ds.syy, ds.sxy])
        dense = op.dense()
        w = rng.standard_normal(dense.shape[1])
        got = op.matvec(w)
        want = dense @ w
        np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-10 * max(1, np.abs(want).max()))


def test_quadratic_form_equals_matvec_inner_product():
    rng = np.random.default_rng(2)
    for _ in range(100):
        ds = random_dataset(rng)
        op = ds.sxx if rng.random() < 0.5 else ds.syy
        w = rng.standard_normal(op.shape[0])
        qf = op.quadratic_form(w)
        assert qf >= 0
        ip = float(w @ op.matvec(w))
        assert qf == pytest.approx(ip, rel=1e-10)


def test_projection_is_reusable():
    rng = np.random.default_rng(3)
    ds = random_dataset(rng)
    w = rng.standard_normal(ds.dx)
    qf, proj = ds.sxx.quadratic_form_with_projection(w)
    assert proj.shape == (ds.n_samples,)
    assert qf == pytest.approx(float(proj @ proj) / ds.n_samples
                               + ds.gamma_x * float(w @ w), rel=1e-12)


def test_sparse_views_match_dense():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((6, 30))
    x[x < 0.5] = 0.0
    y = rng.standard_normal((4, 30))
    dense = CcaDataset(x, y, 1e-2, 1e-3)
    sparse = CcaDataset(sp.csc_matrix(x), y, 1e-2, 1e-3)
    w = rng.standard_normal(6)
    np.testing.assert_allclose(sparse.sxx.matvec(w), dense.sxx.matvec(w), rtol=1e-12)
    assert sparse.sxx.quadratic_form(w) == pytest.approx(dense.sxx.quadratic_form(w), rel=1e-12)
    v = rng.standard_normal(4)
    np.testing.assert_allclose(sparse.sxy.matvec(v), dense.sxy.matvec(v), rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(sparse.x_rows, dense.x_rows, rtol=0, atol=1e-14)


def test_metrics_at_optimum(diag_planted):
    ds, ref = diag_planted
    m = evaluate_metrics(ds, ref.u_star, ref.v_star, ref)
    assert m.align_u == pytest.approx(1.0, abs=1e-10)
    assert m.align_v == pytest.approx(1.0, abs=1e-10)
    assert m.objective == pytest.approx(ref.rho[0], abs=1e-10)
    assert m.suboptimality == pytest.approx(0.0, abs=1e-10)


def test_metrics_orthogonal_direction(diag_planted):
    ds, ref = diag_planted
    # whitened coordinates: e2 is Sigma-orthogonal to u* = e1
    u_orth = np.array([0.0, 1.0])
    m = evaluate_metrics(ds, u_orth, ref.v_star, ref)
    assert m.align_u == pytest.approx(0.0, abs=1e-12)


def test_metrics_half_alignment(diag_planted):
    ds, ref = diag_planted
    u = np.array([1.0, 1.0]) / np.sqrt(2.0)
    m = evaluate_metrics(ds, u, ref.v_star, ref)
    assert m.align_u == pytest.approx(0.5, abs=1e-10)


def test_metrics_sign_invariance():
    rng = np.random.default_rng(5)
    ds = random_dataset(rng)
    ref = exact_solution(ds)
    u = rng.standard_normal(ds.dx)
    v = rng.standard_normal(ds.dy)
    base = evaluate_metrics(ds, u, v, ref)
    flipped = evaluate_metrics(ds, -u, -v, ref)
    assert flipped.align_u == pytest.approx(base.align_u, rel=1e-12)
    assert flipped.align_v == pytest.approx(base.align_v, rel=1e-12)


def test_condition_numbers_tiny_example():
    ds = CcaDataset([[1.0, -1.0]], [[1.0, -1.0]], 1.0, 1.0)
    cn = condition_numbers(ds, exact_solution(ds))
    assert cn["kappa_tilde"] == pytest.approx(0.5, abs=1e-12)
    assert cn["kappa_prime"] == pytest.approx(1.0, abs=1e-12)


def test_condition_numbers_identical_views():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((4, 50))
    ds = CcaDataset(x, x.copy(), 0.0, 0.0)
    cn = condition_numbers(ds, exact_solution(ds))
    sxx = ds.sxx.dense()
    eig = np.linalg.eigvalsh(sxx)
    assert cn["kappa_prime"] == pytest.approx(eig.max() / eig.min(), rel=1e-8)


def test_condition_numbers_vs_dense_oracle():
    ds = planted_dataset([0.8, 0.3], 4, 5, 60, gamma=1e-3, seed=9)
    ref = exact_solution(ds)
    cn = condition_numbers(ds, ref)
    sxx = ds.sxx.dense()
    syy = ds.syy.dense()
    ex = np.linalg.eigvalsh(sxx)
    ey = np.linalg.eigvalsh(syy)
    mx = max(np.sum(ds.x_rows ** 2, axis=1))
    my = max(np.sum(ds.y_rows ** 2, axis=1))
    want_kt = max(mx, my) / min(ex.min(), ey.min())
    assert cn["kappa_tilde"] == pytest.approx(want_kt, rel=1e-8)
    want_kp = max(ex.max() / ex.min(), ey.max() / ey.min())
    assert cn["kappa_prime"] == pytest.approx(want_kp, rel=1e-8)
    assert cn["delta_factor"] == pytest.approx(0.64 / (0.64 - 0.09), rel=1e-8)
    assert cn["kappa_prime"] >= 1.0
    assert cn["delta_factor"] >= 1.0


def test_delta_factor_absent_when_gapless():
    ds = planted_dataset([0.7, 0.7], 3, 3, 50, seed=2)
    cn = condition_numbers(ds, exact_solution(ds))
    assert cn["delta_factor"] is None
