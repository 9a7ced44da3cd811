"""Exact solution oracle and exact alternating least squares.

Everything here deliberately takes the most trustworthy dense path
(symmetric eigendecompositions and full SVD); it is the ground truth the
stochastic solvers are tested against.
"""

import math

import numpy as np

from .core import NumericFailure

DENSIFY_GUARD = 10_000


def symmetric_root(sigma, floor):
    """Symmetric square root and inverse root of a dense SPD matrix.

    Eigenvalues below `floor` are clamped to `floor` before inversion, so
    numerically rank-deficient inputs stay usable.

    Returns (root, inverse_root).
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if floor <= 0:
        raise ValueError("floor must be positive")
    scale = max(1.0, float(np.abs(sigma).max()) if sigma.size else 1.0)
    if np.abs(sigma - sigma.T).max() > 1e-10 * scale:
        raise ValueError("matrix is not symmetric within 1e-10")
    vals, vecs = np.linalg.eigh((sigma + sigma.T) / 2.0)
    vals = np.maximum(vals, floor)
    root = (vecs * np.sqrt(vals)) @ vecs.T
    inverse_root = (vecs / np.sqrt(vals)) @ vecs.T
    return root, inverse_root


class ReferenceSolution:
    """Exact CCA solution from explicit whitening and a full SVD.

    Carries the singular values rho (descending), the optimal directions
    (u_star, v_star), the whitened top pair (phi, psi), the gap, and the
    dense whitening roots for both views.
    """

    def __init__(self, rho, u_star, v_star, phi, psi, whiten_x, whiten_y,
                 sigma_x_eigs, sigma_y_eigs):
        self.rho = rho
        self.u_star = u_star
        self.v_star = v_star
        self.phi = phi
        self.psi = psi
        self.whiten_x = whiten_x      # (root, inverse_root) of Sigma_xx
        self.whiten_y = whiten_y
        self.sigma_x_eigs = sigma_x_eigs
        self.sigma_y_eigs = sigma_y_eigs

    @property
    def gap(self):
        rho2 = self.rho[1] if self.rho.shape[0] > 1 else 0.0
        return float(self.rho[0] - rho2)

    def rho_r(self, rtol=1e-10):
        """Smallest singular value treated as nonzero (rank threshold rtol*rho_1)."""
        cutoff = rtol * self.rho[0]
        nz = self.rho[self.rho > cutoff]
        return float(nz[-1]) if nz.size else 0.0

    def rank(self, rtol=1e-10):
        return int((self.rho > rtol * self.rho[0]).sum())

    def mu_initial(self, dataset, u0, v0):
        """min of squared alignments of an initial pair, i.e. Theorem-style mu."""
        au = dataset.sxx.bilinear(u0, self.u_star) ** 2
        av = dataset.syy.bilinear(v0, self.v_star) ** 2
        return min(au, av)


def exact_solution(dataset, floor_scale=1e-12):
    """Solve the CCA instance exactly by whitening + SVD.

    Guarded to d <= 10,000 since the covariances are densified.
    """
    if dataset.d > DENSIFY_GUARD:
        raise ValueError("dataset too large to densify (d=%d > %d)" % (dataset.d, DENSIFY_GUARD))
    sxx = dataset.sxx.dense()
    syy = dataset.syy.dense()
    sxy = dataset.sxy.dense()

    ex = np.linalg.eigvalsh(sxx)
    ey = np.linalg.eigvalsh(syy)
    floor_x = floor_scale * max(ex.max(), np.finfo(float).tiny)
    floor_y = floor_scale * max(ey.max(), np.finfo(float).tiny)
    root_x, inv_root_x = symmetric_root(sxx, floor_x)
    root_y, inv_root_y = symmetric_root(syy, floor_y)

    t_mat = inv_root_x @ sxy @ inv_root_y
    left, rho, right_t = np.linalg.svd(t_mat, full_matrices=False)

    phi = left[:, 0]
    psi = right_t[0]
    # cosmetic sign convention: largest-magnitude entry of phi is positive
    k = int(np.argmax(np.abs(phi)))
    if phi[k] < 0:
        phi = -phi
        psi = -psi
    u_star = inv_root_x @ phi
    v_star = inv_root_y @ psi

    return ReferenceSolution(
        rho=rho,
        u_star=u_star,
        v_star=v_star,
        phi=phi,
        psi=psi,
        whiten_x=(root_x, inv_root_x),
        whiten_y=(root_y, inv_root_y),
        sigma_x_eigs=np.maximum(ex, floor_x),
        sigma_y_eigs=np.maximum(ey, floor_y),
    )


class ExactAlsState:
    """Iterates of the exact power iterations (normalized and unnormalized)."""

    __slots__ = ("u", "v", "u_tilde", "v_tilde", "step")

    def __init__(self, u, v, u_tilde, v_tilde, step=0):
        self.u = u
        self.v = v
        self.u_tilde = u_tilde
        self.v_tilde = v_tilde
        self.step = step


class _DenseAls:
    """Dense covariances cached once so repeated exact steps stay cheap."""

    def __init__(self, dataset):
        self.sxx = dataset.sxx.dense()
        self.syy = dataset.syy.dense()
        self.sxy = dataset.sxy.dense()

    def solve(self, sigma, b):
        try:
            return np.linalg.solve(sigma, b)
        except np.linalg.LinAlgError as err:
            raise NumericFailure("singular covariance in exact ALS: %s" % err) from err

    def step(self, state, solve=None):
        solve = solve or self.solve
        u_tilde = solve(self.sxx, self.sxy @ state.v)
        v_tilde = solve(self.syy, self.sxy.T @ state.u)
        u = u_tilde / math.sqrt(u_tilde @ self.sxx @ u_tilde)
        v = v_tilde / math.sqrt(v_tilde @ self.syy @ v_tilde)
        return ExactAlsState(u, v, u_tilde, v_tilde, state.step + 1)


def normalized_init(dataset, rng=None, u0=None, v0=None):
    """Random (or given) initial pair, Sigma-normalized per view."""
    if u0 is None or v0 is None:
        if rng is None:
            rng = np.random.default_rng(0)
        u0 = rng.standard_normal(dataset.dx) if u0 is None else u0
        v0 = rng.standard_normal(dataset.dy) if v0 is None else v0
    u0 = np.asarray(u0, dtype=np.float64).ravel()
    v0 = np.asarray(v0, dtype=np.float64).ravel()
    u0 = u0 / math.sqrt(dataset.sxx.quadratic_form(u0))
    v0 = v0 / math.sqrt(dataset.syy.quadratic_form(v0))
    return u0, v0


def sign_aligned_init(dataset, reference, rng=None, u0=None, v0=None):
    """Normalized init whose alignment signs agree across views.

    The top singular pair is unique only up to a joint sign change, and the
    alternating updates preserve the sign product
    (u0^T Sxx u*)(v0^T Syy v*) forever: a negative product converges to the
    objective -rho_1 instead of +rho_1 with identical squared alignments.
    Flipping one freshly drawn random view is therefore pure output
    convention; explicit initial vectors are never second-guessed.
    """
    flip_ok = u0 is None and v0 is None
    u0, v0 = normalized_init(dataset, rng=rng, u0=u0, v0=v0)
    if flip_ok and reference is not None:
        su = dataset.sxx.bilinear(u0, reference.u_star)
        sv = dataset.syy.bilinear(v0, reference.v_star)
        if su * sv < 0:
            v0 = -v0
    return u0, v0


def exact_als_step(state, dataset, solve=None):
    """One exact alternating least squares step (dense solves)."""
    return _DenseAls(dataset).step(state, solve)


def theorem1_steps(rho1, rho2, mu, eta):
    """Step count after which exact ALS is eta-suboptimal in alignment.

    eta >= 1 makes the conclusion vacuous, so zero steps suffice.
    """
    if rho1 <= rho2:
        raise ValueError("needs a positive singular value gap")
    if eta >= 1.0 or mu * eta >= 1.0:
        return 0
    return math.ceil(rho1 ** 2 / (rho1 ** 2 - rho2 ** 2) * math.log(1.0 / (mu * eta)))


def run_exact_als(dataset, u0=None, v0=None, steps=None, eta=None, reference=None,
                  rng=None):
    """Run exact ALS and record metrics at every step.

    Either `steps` is given, or `eta` together with a reference (the bound of
    the convergence theorem picks the step count from the measured initial
    alignment mu).

    Returns (final ExactAlsState, list of per-step MetricReport).
    """
    from .core import evaluate_metrics

    if reference is None:
        reference = exact_solution(dataset)
    u0, v0 = sign_aligned_init(dataset, reference, rng=rng, u0=u0, v0=v0)
    mu = reference.mu_initial(dataset, u0, v0)
    if steps is None:
        if eta is None:
            raise ValueError("give either steps or eta")
        if mu <= 0:
            raise NumericFailure("zero initial alignment; convergence not guaranteed")
        rho2 = reference.rho[1] if reference.rho.shape[0] > 1 else 0.0
        steps = theorem1_steps(reference.rho[0], rho2, mu, eta)

    engine = _DenseAls(dataset)
    state = ExactAlsState(u0, v0, u0.copy(), v0.copy(), 0)
    trace = [evaluate_metrics(dataset, state.u, state.v, reference)]
    for _ in range(steps):
        state = engine.step(state)
        trace.append(evaluate_metrics(dataset, state.u, state.v, reference))
    return state, trace
