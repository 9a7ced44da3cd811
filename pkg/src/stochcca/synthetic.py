"""Synthetic CCA instances.

Two flavors:

generate_synthetic draws N samples from a joint Gaussian whose population
canonical correlations equal the requested list (shared latent factors with
per-view mixing; canonical correlations are invariant to the mixing, so the
empirical spectrum converges to the list as N grows).

planted_dataset builds the empirical covariances exactly: Sigma_xx =
Sigma_yy = I and Sigma_xy = diag(rhos) hold to machine precision for the
finite sample, so the singular values, gap and optimal directions are known
without estimation error. That is the oracle-checked instance every
convergence-bound test runs on.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import CcaDataset
from .reference import symmetric_root


@dataclass
class SyntheticSpec:
    dx: int
    dy: int
    n_samples: int
    canonical_correlations: Sequence[float]
    noise_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        rhos = np.asarray(self.canonical_correlations, dtype=np.float64)
        if rhos.ndim != 1 or rhos.size > min(self.dx, self.dy):
            raise ValueError("need at most min(dx, dy) canonical correlations")
        if rhos.size and (np.any(rhos < 0) or np.any(rhos >= 1)):
            raise ValueError("canonical correlations must lie in [0, 1)")
        if np.any(np.diff(rhos) > 0):
            raise ValueError("canonical correlations must be nonincreasing")
        self.canonical_correlations = tuple(float(r) for r in rhos)


def generate_synthetic(spec, gamma_x=0.0, gamma_y=0.0):
    """Sample a dataset with the spec's population canonical correlations.

    Latent coordinates: pair k of the two views shares a factor z_k with
    weight sqrt(rho_k) plus independent noise of weight sqrt(1 - rho_k),
    giving correlation exactly rho_k; the remaining coordinates are
    independent with standard deviation noise_scale. Each view is then
    mixed by a random rotation. Identical seeds give bit-identical data.
    """
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    L = len(spec.canonical_correlations)
    n = spec.n_samples
    sx = np.empty((spec.dx, n))
    sy = np.empty((spec.dy, n))
    z = rng.standard_normal((L, n))
    ex = rng.standard_normal((L, n))
    ey = rng.standard_normal((L, n))
    for k, rho in enumerate(spec.canonical_correlations):
        sx[k] = math.sqrt(rho) * z[k] + math.sqrt(1.0 - rho) * ex[k]
        sy[k] = math.sqrt(rho) * z[k] + math.sqrt(1.0 - rho) * ey[k]
    if spec.dx > L:
        sx[L:] = spec.noise_scale * rng.standard_normal((spec.dx - L, n))
    if spec.dy > L:
        sy[L:] = spec.noise_scale * rng.standard_normal((spec.dy - L, n))
    qx, _ = np.linalg.qr(rng.standard_normal((spec.dx, spec.dx)))
    qy, _ = np.linalg.qr(rng.standard_normal((spec.dy, spec.dy)))
    return CcaDataset(qx @ sx, qy @ sy, gamma_x, gamma_y, center=True)


def planted_dataset(rhos, dx, dy, n_samples, gamma=0.0, rotate=True, seed=0):
    """Finite-sample instance whose regularized covariances are exactly
    whitened: Sigma_xx = Sigma_yy = I, Sigma_xy = diag(rhos).

    The joint (d x d) second-moment target is [[a I, D], [D^T, a I]] with
    a = 1 - gamma, realized by S = root(target) @ (sqrt(N) Q^T) where the
    columns of Q are orthonormal and orthogonal to the all-ones vector (so
    the rows of S are exactly centered). Requires N > dx + dy and
    max(rhos) <= 1 - gamma for positive semidefiniteness.
    """
    rhos = np.asarray(rhos, dtype=np.float64)
    if rhos.size > min(dx, dy):
        raise ValueError("need at most min(dx, dy) planted correlations")
    if np.any(np.diff(rhos) > 0):
        raise ValueError("planted correlations must be nonincreasing")
    d = dx + dy
    if n_samples <= d:
        raise ValueError("planting needs N > dx + dy (got N=%d, d=%d)" % (n_samples, d))
    a = 1.0 - gamma
    if rhos.size and rhos.max() > a:
        raise ValueError("max planted correlation %.3g exceeds 1 - gamma = %.3g"
                         % (rhos.max(), a))

    target = a * np.eye(d)
    for k, rho in enumerate(rhos):
        target[k, dx + k] = rho
        target[dx + k, k] = rho
    root, _ = symmetric_root(target, floor=1e-15)

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    basis = np.concatenate([np.ones((n_samples, 1)) / math.sqrt(n_samples),
                            rng.standard_normal((n_samples, d))], axis=1)
    q, _ = np.linalg.qr(basis)
    s = root @ (math.sqrt(n_samples) * q[:, 1:d + 1].T)
    x, y = s[:dx], s[dx:]
    if rotate:
        rx, _ = np.linalg.qr(rng.standard_normal((dx, dx)))
        ry, _ = np.linalg.qr(rng.standard_normal((dy, dy)))
        x, y = rx @ x, ry @ y
    # rows are orthogonal to the ones vector already; centering only strips
    # the ~1e-16 residue and marks the dataset as centered
    return CcaDataset(x, y, gamma, gamma, center=True)
