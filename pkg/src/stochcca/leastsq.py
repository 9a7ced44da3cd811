"""Ridge-regression subproblems and their inexact solvers.

Two problem kinds appear in the meta-algorithms: the per-view problem

    f(w) = 1/(2N) ||w^T A - b^T||^2 + gamma/2 ||w||^2

and the joint shifted system

    h(w) = 1/2 w^T Q_lam w - w^T rhs,
    Q_lam = [[lam*Sxx, -Sxy], [-Sxy^T, lam*Syy]],

both of which are finite sums over samples, so full-gradient, accelerated
and variance-reduced stochastic solvers all apply. Small instances also get
a dense closed-form minimizer used as the test oracle and for measured
suboptimality targets.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import NumericFailure

DENSE_GUARD = 200


def _power_iteration_sigma_max(matvec, dim, iters=200, tol=1e-12):
    # deterministic start so repeated runs agree bit for bit
    v = 1.0 + 0.01 * np.arange(dim)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = matvec(v)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        v_new = w / nrm
        lam_new = float(v_new @ matvec(v_new))
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new
        v, lam = v_new, lam_new
    return lam


class PerViewProblem:
    """f(w) = 1/(2N) ||w^T A - b^T||^2 + gamma/2 ||w||^2 - w^T linear.

    `rows` holds the centered samples row-major (N x d) for contiguous
    stochastic access; `target` is the fixed length-N vector b. The optional
    linear term only exists so proximal wrappers stay in the same class.
    """

    kind = "per_view"

    def __init__(self, rows, target, gamma, linear=None):
        self.rows = rows
        self.target = np.asarray(target, dtype=np.float64).ravel()
        if self.target.shape[0] != rows.shape[0]:
            raise ValueError("target length %d, expected N=%d"
                             % (self.target.shape[0], rows.shape[0]))
        self.gamma = float(gamma)
        self.linear = None if linear is None else np.asarray(linear, dtype=np.float64)
        self._cache = {}

    @property
    def dim(self):
        return self.rows.shape[1]

    @property
    def n_samples(self):
        return self.rows.shape[0]

    def _check(self, w):
        w = np.asarray(w, dtype=np.float64).ravel()
        if w.shape[0] != self.dim:
            raise ValueError("vector has dimension %d, problem expects %d"
                             % (w.shape[0], self.dim))
        return w

    def value(self, w):
        w = self._check(w)
        res = self.rows @ w - self.target
        val = 0.5 * float(res @ res) / self.n_samples + 0.5 * self.gamma * float(w @ w)
        if self.linear is not None:
            val -= float(w @ self.linear)
        return val

    def full_gradient(self, w):
        w = self._check(w)
        g = self.rows.T @ (self.rows @ w - self.target) / self.n_samples + self.gamma * w
        if self.linear is not None:
            g = g - self.linear
        return g

    def hessian_matvec(self, w):
        w = np.asarray(w, dtype=np.float64).ravel()
        return self.rows.T @ (self.rows @ w) / self.n_samples + self.gamma * w

    def hessian_dense(self):
        if "hess" not in self._cache:
            if self.dim > DENSE_GUARD:
                raise ValueError("dim %d exceeds dense guard %d" % (self.dim, DENSE_GUARD))
            self._cache["hess"] = (self.rows.T @ self.rows / self.n_samples
                                   + self.gamma * np.eye(self.dim))
        return self._cache["hess"]

    def component_hessian_matvec(self, i, delta):
        if not 0 <= i < self.n_samples:
            raise IndexError("sample index %d out of range [0, %d)" % (i, self.n_samples))
        a = self.rows[i]
        return (a @ delta) * a + self.gamma * delta

    def smoothness(self):
        if "L" not in self._cache:
            if self.dim <= DENSE_GUARD:
                self._cache["L"] = float(np.linalg.eigvalsh(self.hessian_dense()).max())
            else:
                self._cache["L"] = _power_iteration_sigma_max(self.hessian_matvec, self.dim)
        return self._cache["L"]

    def strong_convexity(self):
        if "mu" not in self._cache:
            if self.dim <= DENSE_GUARD:
                self._cache["mu"] = max(float(np.linalg.eigvalsh(self.hessian_dense()).min()), 0.0)
            else:
                self._cache["mu"] = self.gamma
        return self._cache["mu"]

    def max_component_smoothness(self):
        if "Lc" not in self._cache:
            sq = np.einsum("ij,ij->i", self.rows, self.rows)
            self._cache["Lc"] = float(sq.max()) + self.gamma
        return self._cache["Lc"]

    def minimizer(self):
        if "wbar" not in self._cache:
            if self.dim > DENSE_GUARD:
                raise ValueError("dim %d exceeds dense guard %d" % (self.dim, DENSE_GUARD))
            rhs = self.rows.T @ self.target / self.n_samples
            if self.linear is not None:
                rhs = rhs + self.linear
            self._cache["wbar"] = np.linalg.solve(self.hessian_dense(), rhs)
        return self._cache["wbar"]

    def suboptimality(self, w):
        """f(w) - min f, via the exact quadratic identity when dense is feasible.

        For quadratics f(w) - f(wbar) = 1/2 (w-wbar)^T H (w-wbar), which is
        free of the cancellation that plagues direct value differences. Above
        the dense guard a gradient-norm bound ||g||^2 / (2 mu) stands in.
        """
        w = self._check(w)
        if self.dim <= DENSE_GUARD:
            d = w - self.minimizer()
            return 0.5 * float(d @ self.hessian_matvec(d))
        mu = self.strong_convexity()
        if mu <= 0:
            raise NumericFailure("cannot bound suboptimality: no strong convexity "
                                 "estimate above the dense guard")
        g = self.full_gradient(w)
        return float(g @ g) / (2.0 * mu)

    def epoch(self, w, w0, anchor_grad, idx, xi, select_step=None):
        """Run len(idx) variance-reduced steps; returns the last iterate
        (and the iterate at `select_step` if requested)."""
        rows = self.rows
        gamma = self.gamma
        g0 = anchor_grad
        delta = w - w0
        picked = None
        if gamma != 0.0:
            for t, i in enumerate(idx, 1):
                a = rows[i]
                delta = delta - xi * ((a @ delta) * a + gamma * delta + g0)
                if t == select_step:
                    picked = w0 + delta
        else:
            for t, i in enumerate(idx, 1):
                a = rows[i]
                delta = delta - xi * ((a @ delta) * a + g0)
                if t == select_step:
                    picked = w0 + delta
        return w0 + delta, picked

    def proximal_wrapped(self, alpha, z):
        """f(w) + alpha/2 ||w - z||^2 as another PerViewProblem (catalyst)."""
        lin = alpha * z if self.linear is None else self.linear + alpha * z
        return PerViewProblem(self.rows, self.target, self.gamma + alpha, linear=lin)


class JointShiftedProblem:
    """h(w) = 1/2 w^T Q_lam w - w^T rhs over the stacked variable [u; v].

    Per-sample components have Hessian blocks lam*(x_i x_i^T + gx I) and
    -x_i y_i^T, so their average is exactly Q_lam. Components may be
    indefinite when lam < 1; the sum stays convex whenever lam > rho_1.
    """

    kind = "joint_shifted"

    def __init__(self, x_rows, y_rows, gamma_x, gamma_y, lam, rhs):
        if x_rows.shape[0] != y_rows.shape[0]:
            raise ValueError("views disagree on sample count")
        self.x_rows = x_rows
        self.y_rows = y_rows
        self.gamma_x = float(gamma_x)
        self.gamma_y = float(gamma_y)
        self.lam = float(lam)
        self.rhs = np.asarray(rhs, dtype=np.float64).ravel()
        if self.rhs.shape[0] != self.dim:
            raise ValueError("rhs has dimension %d, expected %d" % (self.rhs.shape[0], self.dim))
        self._cache = {}

    @property
    def dx(self):
        return self.x_rows.shape[1]

    @property
    def dy(self):
        return self.y_rows.shape[1]

    @property
    def dim(self):
        return self.dx + self.dy

    @property
    def n_samples(self):
        return self.x_rows.shape[0]

    def _check(self, w):
        w = np.asarray(w, dtype=np.float64).ravel()
        if w.shape[0] != self.dim:
            raise ValueError("vector has dimension %d, problem expects %d"
                             % (w.shape[0], self.dim))
        return w

    def split(self, w):
        return w[:self.dx], w[self.dx:]

    def hessian_matvec(self, w):
        w = np.asarray(w, dtype=np.float64).ravel()
        wx, wy = self.split(w)
        n = self.n_samples
        px = self.x_rows @ wx
        py = self.y_rows @ wy
        gx = self.lam * (self.x_rows.T @ px / n + self.gamma_x * wx) - self.x_rows.T @ py / n
        gy = self.lam * (self.y_rows.T @ py / n + self.gamma_y * wy) - self.y_rows.T @ px / n
        return np.concatenate([gx, gy])

    def value(self, w):
        w = self._check(w)
        return 0.5 * float(w @ self.hessian_matvec(w)) - float(w @ self.rhs)

    def full_gradient(self, w):
        w = self._check(w)
        return self.hessian_matvec(w) - self.rhs

    def hessian_dense(self):
        if "hess" not in self._cache:
            if self.dim > DENSE_GUARD:
                raise ValueError("dim %d exceeds dense guard %d" % (self.dim, DENSE_GUARD))
            n = self.n_samples
            sxx = self.x_rows.T @ self.x_rows / n + self.gamma_x * np.eye(self.dx)
            syy = self.y_rows.T @ self.y_rows / n + self.gamma_y * np.eye(self.dy)
            sxy = self.x_rows.T @ self.y_rows / n
            q = np.block([[self.lam * sxx, -sxy], [-sxy.T, self.lam * syy]])
            self._cache["hess"] = q
        return self._cache["hess"]

    def component_hessian_matvec(self, i, delta):
        if not 0 <= i < self.n_samples:
            raise IndexError("sample index %d out of range [0, %d)" % (i, self.n_samples))
        dxv, dyv = self.split(np.asarray(delta, dtype=np.float64).ravel())
        ax = self.x_rows[i]
        ay = self.y_rows[i]
        sx = ax @ dxv
        sy = ay @ dyv
        gx = (self.lam * sx - sy) * ax + self.lam * self.gamma_x * dxv
        gy = (self.lam * sy - sx) * ay + self.lam * self.gamma_y * dyv
        return np.concatenate([gx, gy])

    def component_hessian_dense(self, i):
        ax = self.x_rows[i]
        ay = self.y_rows[i]
        hxx = self.lam * (np.outer(ax, ax) + self.gamma_x * np.eye(self.dx))
        hyy = self.lam * (np.outer(ay, ay) + self.gamma_y * np.eye(self.dy))
        hxy = -np.outer(ax, ay)
        return np.block([[hxx, hxy], [hxy.T, hyy]])

    def smoothness(self):
        if "L" not in self._cache:
            if self.dim <= DENSE_GUARD:
                self._cache["L"] = float(np.linalg.eigvalsh(self.hessian_dense()).max())
            else:
                self._cache["L"] = _power_iteration_sigma_max(self.hessian_matvec, self.dim)
        return self._cache["L"]

    def strong_convexity(self):
        if "mu" not in self._cache:
            if self.dim <= DENSE_GUARD:
                self._cache["mu"] = max(float(np.linalg.eigvalsh(self.hessian_dense()).min()), 0.0)
            else:
                self._cache["mu"] = min(self.gamma_x, self.gamma_y)
        return self._cache["mu"]

    def max_component_smoothness(self):
        # smoothness bound (lam + 1) * max_i max(||x_i||^2, ||y_i||^2)
        if "Lc" not in self._cache:
            sqx = np.einsum("ij,ij->i", self.x_rows, self.x_rows).max()
            sqy = np.einsum("ij,ij->i", self.y_rows, self.y_rows).max()
            self._cache["Lc"] = (self.lam + 1.0) * float(max(sqx, sqy))
        return self._cache["Lc"]

    def minimizer(self):
        if "wbar" not in self._cache:
            if self.dim > DENSE_GUARD:
                raise ValueError("dim %d exceeds dense guard %d" % (self.dim, DENSE_GUARD))
            try:
                self._cache["wbar"] = np.linalg.solve(self.hessian_dense(), self.rhs)
            except np.linalg.LinAlgError as err:
                raise NumericFailure("shifted system is singular: %s" % err) from err
        return self._cache["wbar"]

    def suboptimality(self, w):
        w = self._check(w)
        if self.dim <= DENSE_GUARD:
            d = w - self.minimizer()
            return 0.5 * float(d @ self.hessian_matvec(d))
        mu = self.strong_convexity()
        if mu <= 0:
            raise NumericFailure("cannot bound suboptimality: no strong convexity "
                                 "estimate above the dense guard")
        g = self.full_gradient(w)
        return float(g @ g) / (2.0 * mu)

    def epoch(self, w, w0, anchor_grad, idx, xi, select_step=None):
        xr = self.x_rows
        yr = self.y_rows
        lam = self.lam
        lgx = lam * self.gamma_x
        lgy = lam * self.gamma_y
        dx = self.dx
        g0x = anchor_grad[:dx]
        g0y = anchor_grad[dx:]
        deltax = w[:dx] - w0[:dx]
        deltay = w[dx:] - w0[dx:]
        picked = None
        for t, i in enumerate(idx, 1):
            ax = xr[i]
            ay = yr[i]
            sx = ax @ deltax
            sy = ay @ deltay
            deltax = deltax - xi * ((lam * sx - sy) * ax + lgx * deltax + g0x)
            deltay = deltay - xi * ((lam * sy - sx) * ay + lgy * deltay + g0y)
            if t == select_step:
                picked = np.concatenate([w0[:dx] + deltax, w0[dx:] + deltay])
        out = np.concatenate([w0[:dx] + deltax, w0[dx:] + deltay])
        return out, picked

    def proximal_wrapped(self, alpha, z):
        """h(w) + alpha/2 ||w - z||^2, again a JointShiftedProblem.

        lam*(gamma + alpha/lam) = lam*gamma + alpha, so the prox term folds
        into the per-view ridges; the linear part folds into rhs.
        """
        return JointShiftedProblem(
            self.x_rows, self.y_rows,
            self.gamma_x + alpha / self.lam, self.gamma_y + alpha / self.lam,
            self.lam, self.rhs + alpha * z,
        )


def per_view_problem(dataset, view, target):
    """The f_t / g_t subproblem for one view with a fixed projection target."""
    if view == "x":
        return PerViewProblem(dataset.x_rows, target, dataset.gamma_x)
    if view == "y":
        return PerViewProblem(dataset.y_rows, target, dataset.gamma_y)
    raise ValueError("view must be 'x' or 'y'")


def joint_shifted_problem(dataset, lam, u_prev, v_prev):
    """The h_t subproblem: rhs is [Sigma_xx u_prev; Sigma_yy v_prev]."""
    rhs = np.concatenate([dataset.sxx.matvec(u_prev), dataset.syy.matvec(v_prev)])
    return JointShiftedProblem(dataset.x_rows, dataset.y_rows,
                               dataset.gamma_x, dataset.gamma_y, lam, rhs)


# -- module-level operation names -------------------------------------------

def full_gradient(problem, w):
    """Batch gradient of the subproblem at w."""
    return problem.full_gradient(w)


def stochastic_gradient_step(problem, w, w0, anchor_grad, i, xi):
    """One variance-reduced update from sample i:

        w <- w - xi * (H_i (w - w0) + anchor_grad)

    where H_i is the per-sample Hessian and anchor_grad = full_gradient(w0).
    Averaged over i this direction equals the full gradient at w.
    """
    w = np.asarray(w, dtype=np.float64).ravel()
    w0 = np.asarray(w0, dtype=np.float64).ravel()
    direction = problem.component_hessian_matvec(i, w - w0) + anchor_grad
    return w - xi * direction


def closed_form_minimizer(problem):
    """Dense normal-equations solution (test oracle, dims <= 200)."""
    return problem.minimizer()


# -- budgets and results -----------------------------------------------------

@dataclass
class SolveBudget:
    """How hard an inner solver should work.

    epsilon mode repeats until measured suboptimality <= epsilon; epochs mode
    runs a fixed count. inner_steps defaults to N; step_size None means the
    solver's auto rule.
    """

    mode: str = "epsilon"
    epsilon: Optional[float] = None
    epochs: Optional[int] = None
    inner_steps: Optional[int] = None
    step_size: Optional[float] = None
    epoch_cap: int = 100
    max_iters: int = 500_000
    svrg_select: str = "last"

    def __post_init__(self):
        if self.mode not in ("epsilon", "epochs"):
            raise ValueError("mode must be 'epsilon' or 'epochs'")
        if self.mode == "epsilon":
            if self.epsilon is None or self.epsilon <= 0:
                raise ValueError("epsilon mode needs epsilon > 0")
        else:
            if self.epochs is None or self.epochs < 1:
                raise ValueError("epochs mode needs epochs >= 1")
        if self.inner_steps is not None and self.inner_steps < 1:
            raise ValueError("inner_steps must be >= 1")
        if self.svrg_select not in ("last", "random"):
            raise ValueError("svrg_select must be 'last' or 'random'")

    @classmethod
    def epsilon_target(cls, epsilon, **kw):
        return cls(mode="epsilon", epsilon=epsilon, **kw)

    @classmethod
    def fixed_epochs(cls, epochs, **kw):
        return cls(mode="epochs", epochs=epochs, **kw)


@dataclass
class SolveResult:
    w: np.ndarray
    passes: float
    iterations: int
    converged: bool
    suboptimality: Optional[float] = None


# -- solvers ------------------------------------------------------------------

def solve_gd(problem, w0, budget, rng=None):
    """Batch gradient descent with auto step 1/L (L by power iteration).

    Objective is nonincreasing for quadratics at xi <= 1/L; three consecutive
    increases are treated as divergence.
    """
    w = np.asarray(w0, dtype=np.float64).copy().ravel()
    xi = budget.step_size if budget.step_size is not None else 1.0 / problem.smoothness()
    max_iters = budget.epochs if budget.mode == "epochs" else budget.max_iters
    prev_val = problem.value(w)
    bad = 0
    it = 0
    sub = None
    converged = budget.mode == "epochs"
    while it < max_iters:
        if budget.mode == "epsilon":
            sub = problem.suboptimality(w)
            if sub <= budget.epsilon:
                converged = True
                break
        w = w - xi * problem.full_gradient(w)
        it += 1
        val = problem.value(w)
        if val > prev_val:
            bad += 1
            if bad >= 3:
                raise NumericFailure(
                    "gradient descent diverging: objective rose 3 consecutive steps "
                    "(step size %.3g, last value %.6g)" % (xi, val))
        else:
            bad = 0
        prev_val = val
    if budget.mode == "epsilon" and not converged:
        sub = problem.suboptimality(w)
        converged = sub <= budget.epsilon
        if not converged:
            raise NumericFailure("gradient descent hit the iteration cap %d "
                                 "(suboptimality %.3g > %.3g)" % (max_iters, sub, budget.epsilon))
    return SolveResult(w, float(it), it, converged, sub)


def solve_agd(problem, w0, budget, rng=None):
    """Nesterov's accelerated gradient for strongly convex quadratics."""
    w = np.asarray(w0, dtype=np.float64).copy().ravel()
    L = 1.0 / budget.step_size if budget.step_size is not None else problem.smoothness()
    xi = 1.0 / L
    mu = problem.strong_convexity()
    if mu > 0:
        kap = L / mu
        beta = (math.sqrt(kap) - 1.0) / (math.sqrt(kap) + 1.0)
    else:
        beta = None  # fall back to the (k-1)/(k+2) schedule
    max_iters = budget.epochs if budget.mode == "epochs" else budget.max_iters
    y = w.copy()
    init_val = problem.value(w)
    it = 0
    sub = None
    converged = budget.mode == "epochs"
    while it < max_iters:
        if budget.mode == "epsilon":
            sub = problem.suboptimality(w)
            if sub <= budget.epsilon:
                converged = True
                break
        w_new = y - xi * problem.full_gradient(y)
        m = beta if beta is not None else it / (it + 3.0)
        y = w_new + m * (w_new - w)
        w = w_new
        it += 1
        # momentum makes the objective legitimately non-monotone; only a
        # blow-up far past the initial value counts as divergence
        val = problem.value(w)
        if val > init_val + 1e3 * max(abs(init_val), 1.0):
            raise NumericFailure("accelerated gradient diverging (value %.6g)" % val)
    if budget.mode == "epsilon" and not converged:
        sub = problem.suboptimality(w)
        converged = sub <= budget.epsilon
        if not converged:
            raise NumericFailure("accelerated gradient hit the iteration cap %d "
                                 "(suboptimality %.3g > %.3g)" % (max_iters, sub, budget.epsilon))
    return SolveResult(w, float(it), it, converged, sub)


def solve_svrg(problem, w0, budget, rng=None):
    """Variance-reduced stochastic gradient.

    Each epoch evaluates one batch gradient anchor and runs m stochastic
    steps (m defaults to N), so an epoch costs exactly 2 passes at m = N.
    The epoch output is the last inner iterate by default; set
    svrg_select='random' for the randomly-chosen-iterate variant.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    w = np.asarray(w0, dtype=np.float64).copy().ravel()
    n = problem.n_samples
    m = budget.inner_steps if budget.inner_steps is not None else n
    xi = (budget.step_size if budget.step_size is not None
          else 1.0 / problem.max_component_smoothness())
    max_epochs = budget.epochs if budget.mode == "epochs" else budget.epoch_cap
    passes = 0.0
    sub = None
    converged = budget.mode == "epochs"
    epochs_run = 0
    for _ in range(max_epochs):
        if budget.mode == "epsilon":
            sub = problem.suboptimality(w)
            if sub <= budget.epsilon:
                converged = True
                break
        anchor = w
        g0 = problem.full_gradient(anchor)
        idx = rng.integers(0, n, size=m)
        select = int(rng.integers(1, m + 1)) if budget.svrg_select == "random" else None
        last, picked = problem.epoch(w, anchor, g0, idx, xi, select_step=select)
        w = picked if select is not None else last
        epochs_run += 1
        passes += 1.0 + m / n
    if budget.mode == "epsilon" and not converged:
        sub = problem.suboptimality(w)
        converged = sub <= budget.epsilon
        if not converged:
            raise NumericFailure("SVRG hit the epoch cap %d (suboptimality %.3g > %.3g)"
                                 % (max_epochs, sub, budget.epsilon))
    return SolveResult(w, passes, epochs_run, converged, sub)


def solve_asvrg(problem, w0, budget, rng=None):
    """SVRG with outer proximal-point (catalyst-style) acceleration.

    Only pays off when the component condition number exceeds N; below that
    it falls straight back to plain SVRG, as advertised. Acceleration
    parameters follow the usual catalyst recipe since the choice is not
    pinned down elsewhere.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    lbar = problem.max_component_smoothness()
    mu = problem.strong_convexity()
    n = problem.n_samples
    if mu <= 0 or lbar / mu <= n:
        return solve_svrg(problem, w0, budget, rng=rng)

    w = np.asarray(w0, dtype=np.float64).copy().ravel()
    alpha = max((lbar - mu) / (n + 1) - mu, mu * 1e-3)
    q = mu / (mu + alpha)
    theta = math.sqrt(q)
    y = w.copy()
    passes = 0.0
    sub = problem.suboptimality(w)
    sub0 = max(sub, 1e-300)
    # inner accuracy decays at the outer linear rate so the acceleration
    # survives the inexact subproblem solves
    inner_eps = 0.1 * sub0
    rate = 1.0 - 0.9 * math.sqrt(q)
    max_outer = budget.epochs if budget.mode == "epochs" else budget.epoch_cap
    converged = budget.mode == "epochs" or sub <= (budget.epsilon or 0)
    it = 0
    while it < max_outer and not (budget.mode == "epsilon" and converged):
        it += 1
        subproblem = problem.proximal_wrapped(alpha, y)
        # the prox term amplifies subproblem error by roughly 1/q, so the
        # inner floor has to sit q below the outer target
        floor = 0.05 * q * (budget.epsilon or inner_eps)
        inner = SolveBudget.epsilon_target(
            max(inner_eps, floor), inner_steps=budget.inner_steps,
            epoch_cap=budget.epoch_cap, svrg_select=budget.svrg_select)
        res = solve_svrg(subproblem, w, inner, rng=rng)
        passes += res.passes
        w_new = res.w
        theta_new = 0.5 * (q - theta ** 2 + math.sqrt((q - theta ** 2) ** 2
                                                      + 4 * theta ** 2))
        beta = theta * (1 - theta) / (theta ** 2 + theta_new)
        y = w_new + beta * (w_new - w)
        w = w_new
        theta = theta_new
        inner_eps *= rate
        if budget.mode == "epsilon":
            sub = problem.suboptimality(w)
            if sub > 1e9 * sub0:
                raise NumericFailure("ASVRG outer loop diverging "
                                     "(suboptimality %.3g from %.3g)" % (sub, sub0))
            converged = sub <= budget.epsilon
    if budget.mode == "epsilon" and not converged:
        raise NumericFailure("ASVRG hit the outer cap %d (suboptimality %.3g > %.3g)"
                             % (max_outer, sub, budget.epsilon))
    return SolveResult(w, passes, it, converged, sub)


def solve_exact(problem, w0=None, budget=None, rng=None):
    """Dense direct solve; the epsilon-to-machine-precision inner 'solver'.

    Counts zero passes: it exists for oracles and theorem-mode runs whose
    epsilon targets sit below what float64 can certify.
    """
    w = problem.minimizer().copy()
    return SolveResult(w, 0.0, 0, True, 0.0)


SOLVERS = {
    "gd": solve_gd,
    "agd": solve_agd,
    "svrg": solve_svrg,
    "asvrg": solve_asvrg,
    "exact": solve_exact,
}
