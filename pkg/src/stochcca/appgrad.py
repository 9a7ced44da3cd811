"""AppGrad-style baselines.

appgrad: one batch gradient step per view on the ridge subproblems followed
by exact Sigma-normalization; identical to the ALS meta-algorithm with a
single gradient-descent inner step.

s-appgrad: the minibatch variant that estimates both the gradients and the
normalization quadratic forms from a small batch. Its normalizations are
inexact by design, which is exactly the failure mode the benchmark exhibits:
the iterates stop improving once the minibatch noise dominates.
"""

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .als import AlsState
from .core import feasible_point_metrics
from .leastsq import _power_iteration_sigma_max
from .reference import exact_solution, sign_aligned_init
from .trace import RunTrace, TraceRow


@dataclass
class MinibatchConfig:
    batch_size: int = 100
    step_size: Optional[float] = None
    steps: Optional[int] = None
    seed: int = 0

    def validate(self, n_samples):
        if not 1 <= self.batch_size <= n_samples:
            raise ValueError("batch_size must lie in [1, N]")


def _sigma_max(dataset, which):
    key = "sigma_max_" + which
    if key not in dataset._cache:
        op = dataset.sxx if which == "x" else dataset.syy
        dataset._cache[key] = _power_iteration_sigma_max(op.matvec, op.shape[0])
    return dataset._cache[key]


def auto_step_sizes(dataset):
    """(1/sigma_max(Sxx), 1/sigma_max(Syy)), the batch-gradient step rule."""
    return 1.0 / _sigma_max(dataset, "x"), 1.0 / _sigma_max(dataset, "y")


def appgrad_step(state, dataset, step_size):
    """One full-batch step on both views, then exact normalization.

    step_size may be a scalar or a per-view pair. With zero regularization
    the update is u~ <- u~ - xi X(X^T u~ - Y^T v_{t-1})/N, i.e. the classic
    alternating gradient recursion.
    """
    xi_u, xi_v = step_size if isinstance(step_size, (tuple, list)) else (step_size, step_size)
    xr, yr = dataset.x_rows, dataset.y_rows
    n = dataset.n_samples
    target_u = yr @ state.v          # v_{t-1}^T y_i
    target_v = xr @ state.u          # u_{t-1}^T x_i
    gu = xr.T @ (xr @ state.u_tilde - target_u) / n + dataset.gamma_x * state.u_tilde
    gv = yr.T @ (yr @ state.v_tilde - target_v) / n + dataset.gamma_y * state.v_tilde
    u_tilde = state.u_tilde - xi_u * gu
    v_tilde = state.v_tilde - xi_v * gv
    pu = xr @ u_tilde
    pv = yr @ v_tilde
    qu = float(pu @ pu) / n + dataset.gamma_x * float(u_tilde @ u_tilde)
    qv = float(pv @ pv) / n + dataset.gamma_y * float(v_tilde @ v_tilde)
    u = u_tilde / math.sqrt(qu)
    v = v_tilde / math.sqrt(qv)
    # both view gradients together touch every sample once: one pass; the
    # normalization projections are reused by the next gradient
    return AlsState(u, v, u_tilde, v_tilde, state.t + 1, state.passes + 1.0)


def s_appgrad_step(state, dataset, mb, batch):
    """One minibatch step: minibatch gradients, minibatch normalization.

    The same batch estimates the gradients and the normalization quadratic
    forms, so the constraints hold only approximately. With batch == all
    samples (in natural order) this reproduces appgrad_step exactly.
    """
    xi_u, xi_v = (mb.step_size if isinstance(mb.step_size, (tuple, list))
                  else (mb.step_size, mb.step_size))
    xb = dataset.x_rows[batch]
    yb = dataset.y_rows[batch]
    b = len(batch)
    gu = xb.T @ (xb @ state.u_tilde - yb @ state.v) / b + dataset.gamma_x * state.u_tilde
    gv = yb.T @ (yb @ state.v_tilde - xb @ state.u) / b + dataset.gamma_y * state.v_tilde
    u_tilde = state.u_tilde - xi_u * gu
    v_tilde = state.v_tilde - xi_v * gv
    pu = xb @ u_tilde
    pv = yb @ v_tilde
    qu = float(pu @ pu) / b + dataset.gamma_x * float(u_tilde @ u_tilde)
    qv = float(pv @ pv) / b + dataset.gamma_y * float(v_tilde @ v_tilde)
    u = u_tilde / math.sqrt(qu)
    v = v_tilde / math.sqrt(qv)
    return AlsState(u, v, u_tilde, v_tilde, state.t + 1, state.passes + b / dataset.n_samples)


@dataclass
class BaselineResult:
    u: np.ndarray
    v: np.ndarray
    state: AlsState
    trace: RunTrace


def run_appgrad(dataset, steps=None, max_passes=None, step_size=None, seed=0,
                reference=None, u0=None, v0=None, algorithm_name="appgrad"):
    if reference is None:
        reference = exact_solution(dataset)
    if step_size is None:
        step_size = auto_step_sizes(dataset)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    u, v = sign_aligned_init(dataset, reference, rng=rng, u0=u0, v0=v0)
    state = AlsState(u, v, u.copy(), v.copy(), 0, 0.0)
    trace = RunTrace()
    t0 = time.perf_counter()
    _record(trace, algorithm_name, dataset, state, reference, t0)
    if steps is None:
        steps = int(max_passes) if max_passes is not None else 100
    for _ in range(steps):
        if max_passes is not None and state.passes >= max_passes:
            break
        state = appgrad_step(state, dataset, step_size)
        _record(trace, algorithm_name, dataset, state, reference, t0)
    return BaselineResult(state.u, state.v, state, trace)


def run_s_appgrad(dataset, mb=None, max_passes=None, reference=None, u0=None,
                  v0=None, algorithm_name="s-appgrad"):
    """Minibatches are drawn without replacement and reshuffled every pass."""
    if reference is None:
        reference = exact_solution(dataset)
    mb = mb or MinibatchConfig()
    mb.validate(dataset.n_samples)
    if mb.step_size is None:
        mb = MinibatchConfig(mb.batch_size, auto_step_sizes(dataset), mb.steps, mb.seed)
    rng = np.random.default_rng(np.random.SeedSequence(mb.seed))
    u, v = sign_aligned_init(dataset, reference, rng=rng, u0=u0, v0=v0)
    state = AlsState(u, v, u.copy(), v.copy(), 0, 0.0)
    trace = RunTrace()
    t0 = time.perf_counter()
    _record(trace, algorithm_name, dataset, state, reference, t0)

    n = dataset.n_samples
    b = mb.batch_size
    steps = mb.steps
    if steps is None:
        steps = int(math.ceil((max_passes if max_passes is not None else 10) * n / b))
    steps_per_pass = max(1, n // b)
    queue = []
    for k in range(steps):
        if max_passes is not None and state.passes >= max_passes:
            break
        if len(queue) < b:
            # full-batch degenerate case keeps the natural order so it
            # reproduces appgrad bit for bit
            fresh = np.arange(n) if b == n else rng.permutation(n)
            queue = list(fresh)
        batch = np.array(queue[:b])
        queue = queue[b:]
        state = s_appgrad_step(state, dataset, mb, batch)
        if state.t % steps_per_pass == 0 or k == steps - 1:
            _record(trace, algorithm_name, dataset, state, reference, t0)
    return BaselineResult(state.u, state.v, state, trace)


def _record(trace, name, dataset, state, reference, t0):
    m, qu, qv = feasible_point_metrics(dataset, state.u, state.v, reference)
    trace.append(TraceRow(name, state.passes, m.objective, m.suboptimality,
                          m.align_u, m.align_v, qu, qv,
                          time.perf_counter() - t0))
