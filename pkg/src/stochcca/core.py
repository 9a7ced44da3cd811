"""Two-view CCA problem representation.

Holds the paired data matrices (one column per sample), implicit covariance
operators that never materialize d x d matrices, and the evaluation metrics
(objective, alignments, constraint residuals, condition numbers) used by every
solver and test in this package.
"""

import numpy as np
import scipy.sparse as sp


class NumericFailure(RuntimeError):
    """An iterative routine diverged, hit a cap, or met a singular system."""


def _as_float_matrix(view):
    if sp.issparse(view):
        return sp.csc_matrix(view, dtype=np.float64)
    a = np.asarray(view, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("view must be a 2-d matrix, got shape %s" % (a.shape,))
    return a


def center_columns(view):
    """Return a dense copy of `view` with every row shifted to zero mean.

    Columns are samples, so this removes the per-feature mean across the
    sample axis.
    """
    a = np.asarray(view, dtype=np.float64)
    if a.size == 0:
        raise ValueError("cannot center an empty view")
    return a - a.mean(axis=1, keepdims=True)


class CovarianceOperator:
    """Implicit (cross-)covariance over column-sample views.

    auto kind:  Sigma = (1/N) A_c A_c^T + gamma I  for one centered view A_c.
    cross kind: Sigma_xy = (1/N) X_c Y_c^T  (no ridge).

    Centering is implicit: the raw matrix plus its row-mean vector are kept,
    and the mean correction is applied inside every product. This preserves
    sparsity of sparse inputs. Instances are immutable and shareable.
    """

    def __init__(self, data, mean=None, gamma=0.0, right=None, right_mean=None):
        self.data = data
        self.mean = mean
        self.gamma = float(gamma)
        self.right = right
        self.right_mean = right_mean
        self.kind = "auto" if right is None else "cross"
        if self.kind == "cross" and gamma:
            raise ValueError("cross-covariance carries no ridge term")
        self.n_samples = data.shape[1]
        if right is not None and right.shape[1] != self.n_samples:
            raise ValueError("cross-covariance views disagree on sample count")

    @property
    def shape(self):
        if self.kind == "auto":
            return (self.data.shape[0], self.data.shape[0])
        return (self.data.shape[0], self.right.shape[0])

    def _project(self, data, mean, w):
        # centered projection w^T A_c as a length-N vector
        p = np.asarray(data.T @ w).ravel()
        if mean is not None:
            p = p - float(mean @ w)
        return p

    def project(self, w):
        """Projection of the training set, w^T A_c (length N).

        This is the quantity reused between exact normalization and the next
        batch gradient, so callers can keep it.
        """
        w = self._check_dim(w, self.data.shape[0])
        return self._project(self.data, self.mean, w)

    def _lift(self, data, mean, p):
        # centered back-projection A_c p for a length-N vector p
        out = np.asarray(data @ p).ravel()
        if mean is not None:
            out = out - mean * p.sum()
        return out

    def matvec(self, w):
        """Sigma @ w without forming Sigma."""
        if self.kind == "auto":
            w = self._check_dim(w, self.data.shape[0])
            p = self._project(self.data, self.mean, w)
            return self._lift(self.data, self.mean, p) / self.n_samples + self.gamma * w
        w = self._check_dim(w, self.right.shape[0])
        p = self._project(self.right, self.right_mean, w)
        return self._lift(self.data, self.mean, p) / self.n_samples

    def rmatvec(self, w):
        """Sigma^T @ w; differs from matvec only for the cross kind."""
        if self.kind == "auto":
            return self.matvec(w)
        w = self._check_dim(w, self.data.shape[0])
        p = self._project(self.data, self.mean, w)
        return self._lift(self.right, self.right_mean, p) / self.n_samples

    def quadratic_form(self, w):
        """w^T Sigma w for the auto kind; nonnegative by construction."""
        if self.kind != "auto":
            raise ValueError("quadratic form is defined for the auto kind only")
        w = self._check_dim(w, self.data.shape[0])
        p = self._project(self.data, self.mean, w)
        return float(p @ p) / self.n_samples + self.gamma * float(w @ w)

    def quadratic_form_with_projection(self, w):
        """(w^T Sigma w, w^T A_c); the projection is reusable by callers."""
        if self.kind != "auto":
            raise ValueError("quadratic form is defined for the auto kind only")
        w = self._check_dim(w, self.data.shape[0])
        p = self._project(self.data, self.mean, w)
        return float(p @ p) / self.n_samples + self.gamma * float(w @ w), p

    def bilinear(self, w1, w2):
        """w1^T Sigma w2 (auto kind)."""
        if self.kind != "auto":
            raise ValueError("bilinear form is defined for the auto kind only")
        w1 = self._check_dim(w1, self.data.shape[0])
        w2 = self._check_dim(w2, self.data.shape[0])
        p1 = self._project(self.data, self.mean, w1)
        p2 = self._project(self.data, self.mean, w2)
        return float(p1 @ p2) / self.n_samples + self.gamma * float(w1 @ w2)

    def dense(self):
        """Materialize Sigma as a dense array (small problems / oracles)."""
        a = self.data.toarray() if sp.issparse(self.data) else np.array(self.data)
        if self.mean is not None:
            a = a - self.mean[:, None]
        if self.kind == "auto":
            return a @ a.T / self.n_samples + self.gamma * np.eye(a.shape[0])
        b = self.right.toarray() if sp.issparse(self.right) else np.array(self.right)
        if self.right_mean is not None:
            b = b - self.right_mean[:, None]
        return a @ b.T / self.n_samples

    @staticmethod
    def _check_dim(w, d):
        w = np.asarray(w, dtype=np.float64).ravel()
        if w.shape[0] != d:
            raise ValueError("vector has dimension %d, operator expects %d" % (w.shape[0], d))
        return w


def cov_matvec(op, w):
    """Evaluate Sigma @ w through the implicit operator."""
    return op.matvec(w)


def cov_quadratic_form(op, w):
    """Evaluate w^T Sigma w through the implicit operator (auto kind)."""
    return op.quadratic_form(w)


class CcaDataset:
    """A CCA problem instance: centered views X (dx x N), Y (dy x N) and ridges.

    Dense views are centered eagerly. Sparse views are kept raw with their
    row means stored separately; the centering is applied implicitly inside
    the covariance operators and sample accessors, preserving sparsity.
    Instances are immutable after construction.
    """

    def __init__(self, x_view, y_view, gamma_x=0.0, gamma_y=0.0, center=True):
        x = _as_float_matrix(x_view)
        y = _as_float_matrix(y_view)
        if x.shape[1] != y.shape[1]:
            raise ValueError(
                "views disagree on sample count: x has %d columns, y has %d"
                % (x.shape[1], y.shape[1])
            )
        if x.shape[1] < 1:
            raise ValueError("dataset needs at least one sample")
        if gamma_x < 0 or gamma_y < 0:
            raise ValueError("regularization parameters must be nonnegative")

        self.x_mean = None
        self.y_mean = None
        if center:
            if sp.issparse(x):
                self.x_mean = np.asarray(x.mean(axis=1)).ravel()
            else:
                x = x - x.mean(axis=1, keepdims=True)
            if sp.issparse(y):
                self.y_mean = np.asarray(y.mean(axis=1)).ravel()
            else:
                y = y - y.mean(axis=1, keepdims=True)
        self.x_view = x
        self.y_view = y
        self.gamma_x = float(gamma_x)
        self.gamma_y = float(gamma_y)
        self.centered = bool(center)
        self._cache = {}

    # -- basic shape info ---------------------------------------------------

    @property
    def n_samples(self):
        return self.x_view.shape[1]

    @property
    def dx(self):
        return self.x_view.shape[0]

    @property
    def dy(self):
        return self.y_view.shape[0]

    @property
    def d(self):
        return self.dx + self.dy

    def with_gammas(self, gamma_x, gamma_y):
        """A new dataset sharing the same (already centered) views."""
        out = CcaDataset.__new__(CcaDataset)
        out.x_view = self.x_view
        out.y_view = self.y_view
        out.x_mean = self.x_mean
        out.y_mean = self.y_mean
        out.gamma_x = float(gamma_x)
        out.gamma_y = float(gamma_y)
        out.centered = self.centered
        out._cache = {}
        return out

    # -- covariance operators -----------------------------------------------

    @property
    def sxx(self):
        if "sxx" not in self._cache:
            self._cache["sxx"] = CovarianceOperator(self.x_view, self.x_mean, self.gamma_x)
        return self._cache["sxx"]

    @property
    def syy(self):
        if "syy" not in self._cache:
            self._cache["syy"] = CovarianceOperator(self.y_view, self.y_mean, self.gamma_y)
        return self._cache["syy"]

    @property
    def sxy(self):
        if "sxy" not in self._cache:
            self._cache["sxy"] = CovarianceOperator(
                self.x_view, self.x_mean, 0.0, right=self.y_view, right_mean=self.y_mean
            )
        return self._cache["sxy"]

    # -- sample access (stochastic solvers) ----------------------------------

    def _rows(self, which):
        key = which + "_rows"
        if key not in self._cache:
            view = self.x_view if which == "x" else self.y_view
            mean = self.x_mean if which == "x" else self.y_mean
            if sp.issparse(view):
                dense = view.toarray()
                if mean is not None:
                    dense = dense - mean[:, None]
                self._cache[key] = np.ascontiguousarray(dense.T)
            else:
                self._cache[key] = np.ascontiguousarray(view.T)
        return self._cache[key]

    @property
    def x_rows(self):
        """Centered samples of view x in row-major (N x dx) layout."""
        return self._rows("x")

    @property
    def y_rows(self):
        return self._rows("y")

    def max_sq_norms(self):
        """(max_i ||x_i||^2, max_i ||y_i||^2) over centered samples."""
        if "max_sq" not in self._cache:
            mx = float(np.einsum("ij,ij->i", self.x_rows, self.x_rows).max())
            my = float(np.einsum("ij,ij->i", self.y_rows, self.y_rows).max())
            self._cache["max_sq"] = (mx, my)
        return self._cache["max_sq"]


class MetricReport:
    """Snapshot of solution quality against the exact reference."""

    __slots__ = ("objective", "align_u", "align_v", "constraint_u", "constraint_v",
                 "suboptimality")

    def __init__(self, objective, align_u, align_v, constraint_u, constraint_v,
                 suboptimality):
        self.objective = objective
        self.align_u = align_u
        self.align_v = align_v
        self.constraint_u = constraint_u
        self.constraint_v = constraint_v
        self.suboptimality = suboptimality

    def min_alignment(self):
        return min(self.align_u, self.align_v)

    def __repr__(self):
        return ("MetricReport(objective=%.6g, align_u=%.6g, align_v=%.6g, "
                "constraint_u=%.6g, constraint_v=%.6g, suboptimality=%.6g)"
                % (self.objective, self.align_u, self.align_v,
                   self.constraint_u, self.constraint_v, self.suboptimality))


def evaluate_metrics(dataset, u, v, reference):
    """Objective, squared alignments and constraint values of (u, v).

    Alignments are (u^T Sigma_xx u*)^2 and (v^T Sigma_yy v*)^2, so they are
    invariant under sign flips of any argument. Suboptimality is rho_1 minus
    the objective u^T Sigma_xy v.
    """
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    px = dataset.sxx.project(u)
    py = dataset.syy.project(v)
    objective = float(px @ py) / dataset.n_samples
    align_u = dataset.sxx.bilinear(u, reference.u_star) ** 2
    align_v = dataset.syy.bilinear(v, reference.v_star) ** 2
    constraint_u = float(px @ px) / dataset.n_samples + dataset.gamma_x * float(u @ u)
    constraint_v = float(py @ py) / dataset.n_samples + dataset.gamma_y * float(v @ v)
    return MetricReport(objective, align_u, align_v, constraint_u, constraint_v,
                        reference.rho[0] - objective)


def feasible_point_metrics(dataset, u, v, reference):
    """Metrics of the exactly normalized copies of (u, v), plus the raw
    constraint values u^T Sigma_xx u and v^T Sigma_yy v of the iterates.

    Benchmarks evaluate every algorithm this way so suboptimality always
    refers to a feasible candidate; the raw constraints still expose how far
    the iterate itself is from the constraint set.
    """
    import math

    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    qu = dataset.sxx.quadratic_form(u)
    qv = dataset.syy.quadratic_form(v)
    if qu <= 0 or qv <= 0:
        raise NumericFailure("iterate has zero Sigma-norm")
    m = evaluate_metrics(dataset, u / math.sqrt(qu), v / math.sqrt(qv), reference)
    return m, qu, qv


def condition_numbers(dataset, reference, gap_rtol=1e-12):
    """Condition numbers of the least squares subproblems and the gap factor.

    kappa_tilde = max_i max(||x_i||^2, ||y_i||^2) / min sigma_min(Sigma)
    kappa       = max over views of max_i ||.||^2 / sigma_min of that view
    kappa_prime = max over views of sigma_max / sigma_min
    delta_factor = rho_1^2 / (rho_1^2 - rho_2^2), None when the gap vanishes

    Extreme eigenvalues come from the dense reference decomposition and
    include the ridge terms.
    """
    mx, my = dataset.max_sq_norms()
    ex, ey = reference.sigma_x_eigs, reference.sigma_y_eigs
    smin_x, smax_x = float(ex.min()), float(ex.max())
    smin_y, smax_y = float(ey.min()), float(ey.max())
    kappa_tilde = max(mx, my) / min(smin_x, smin_y)
    kappa = max(mx / smin_x, my / smin_y)
    kappa_prime = max(smax_x / smin_x, smax_y / smin_y)
    rho1 = reference.rho[0]
    rho2 = reference.rho[1] if reference.rho.shape[0] > 1 else 0.0
    if rho1 - rho2 <= gap_rtol * max(rho1, 1e-300):
        delta_factor = None
    else:
        delta_factor = rho1 ** 2 / (rho1 ** 2 - rho2 ** 2)
    return {
        "kappa_tilde": kappa_tilde,
        "kappa": kappa,
        "kappa_prime": kappa_prime,
        "delta_factor": delta_factor,
    }
