import numpy as np
import pytest
import scipy.linalg

from stochcca import CcaDataset, exact_solution, planted_dataset


def random_dataset(rng, dx=None, dy=None, n=None, gamma_x=None, gamma_y=None):
    dx = dx or int(rng.integers(2, 8))
    dy = dy or int(rng.integers(2, 8))
    n = n or int(rng.integers(dx + dy + 5, 60))
    gx = rng.uniform(1e-4, 1e-1) if gamma_x is None else gamma_x
    gy = rng.uniform(1e-4, 1e-1) if gamma_y is None else gamma_y
    x = rng.standard_normal((dx, n))
    y = 0.5 * x[: min(dx, dy)] if dy <= dx else None  # inject correlation
    yv = rng.standard_normal((dy, n))
    if y is not None:
        yv[: y.shape[0]] += y
    return CcaDataset(x, yv, gx, gy, center=True)


def generalized_eig_rho1(dataset):
    """Independent oracle: rho_1 as the top generalized eigenvalue of
    [[0, Sxy], [Sxy^T, 0]] z = rho blockdiag(Sxx, Syy) z."""
    sxx = dataset.sxx.dense()
    syy = dataset.syy.dense()
    sxy = dataset.sxy.dense()
    dx = dataset.dx
    a = np.zeros((dataset.d, dataset.d))
    a[:dx, dx:] = sxy
    a[dx:, :dx] = sxy.T
    b = scipy.linalg.block_diag(sxx, syy)
    vals = scipy.linalg.eigh(a, b, eigvals_only=True)
    return float(vals[-1])


@pytest.fixture
def tiny_dataset():
    # X = Y = [[1, -1]]: Sigma_xx = Sigma_yy = 1 + gamma, T scalar
    return CcaDataset([[1.0, -1.0]], [[1.0, -1.0]], 0.0, 0.0)


@pytest.fixture
def diag_planted():
    """Whitened instance with T = diag(0.9, 0.5): u-coordinates equal the
    whitened coordinates since Sigma_xx = Sigma_yy = I."""
    ds = planted_dataset([0.9, 0.5], 2, 2, 40, rotate=False, seed=1)
    return ds, exact_solution(ds)
