"""Stochastic canonical correlation analysis.

Globally convergent meta-algorithms (alternating least squares and
shift-and-invert preconditioning) built on inexact ridge-regression solvers
(GD, AGD, SVRG, ASVRG), an exact dense oracle, AppGrad baselines, synthetic
instance generators and a benchmark harness.
"""

from .core import (CcaDataset, CovarianceOperator, MetricReport, NumericFailure,
                   center_columns, condition_numbers, cov_matvec,
                   cov_quadratic_form, evaluate_metrics, feasible_point_metrics)
from .reference import (ExactAlsState, ReferenceSolution, exact_als_step,
                        exact_solution, normalized_init, run_exact_als,
                        symmetric_root, theorem1_steps)
from .leastsq import (JointShiftedProblem, PerViewProblem, SolveBudget,
                      SolveResult, closed_form_minimizer, full_gradient,
                      joint_shifted_problem, per_view_problem, solve_agd,
                      solve_asvrg, solve_exact, solve_gd, solve_svrg,
                      stochastic_gradient_step)
from .als import (AlsConfig, AlsResult, AlsState, als_outer_step, run_als,
                  theorem2_schedule, warm_start_gap)
from .shift_invert import (SiConfig, SiResult, SiState, estimate_delta_s,
                           final_normalization, run_si, run_si_phase1,
                           si_power_step, theorem3_parameters)
from .appgrad import (MinibatchConfig, appgrad_step, run_appgrad, run_s_appgrad,
                      s_appgrad_step)
from .trace import RunTrace, TraceRow
from .synthetic import SyntheticSpec, generate_synthetic, planted_dataset
from .datasets import load_csv_pair, load_mnist_idx_split, save_csv_pair
from .bench import (ConfigError, ExperimentConfig, build_dataset,
                    emit_plot_script, run_experiment)

__version__ = "0.1.0"
