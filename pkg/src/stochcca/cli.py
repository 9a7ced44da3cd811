"""Command line interface.

Subcommands: exact (print the oracle summary), solve (run one algorithm),
gen (write a synthetic dataset), bench (run an experiment grid). Exit codes:
0 on success, 2 on configuration/input errors, 3 on numeric failures.
"""

import argparse
import json
import os
import sys

from .appgrad import MinibatchConfig
from .bench import (ConfigError, ExperimentConfig, build_dataset, dataset_summary,
                    emit_plot_script, run_cell, run_experiment)
from .core import NumericFailure
from .datasets import save_csv_pair
from .reference import exact_solution
from .synthetic import SyntheticSpec, generate_synthetic

ALG_CHOICES = ["als-vr", "als-avr", "als-agd", "si-vr", "si-avr",
               "appgrad", "s-appgrad"]


def _add_dataset_args(p):
    p.add_argument("--x", help="CSV of view x, one sample per row")
    p.add_argument("--y", help="CSV of view y, one sample per row")
    p.add_argument("--mnist", help="idx3 image file split into left/right halves")
    p.add_argument("--synthetic", help="JSON spec for a synthetic dataset")
    p.add_argument("--gamma-x", type=float, default=0.0)
    p.add_argument("--gamma-y", type=float, default=0.0)


def _dataset_descriptor(args):
    given = [name for name, val in (("--x/--y", args.x and args.y),
                                    ("--mnist", args.mnist),
                                    ("--synthetic", args.synthetic)) if val]
    if len(given) != 1:
        raise ConfigError("give exactly one dataset source: --x/--y, --mnist "
                          "or --synthetic")
    if args.x:
        if not args.y:
            raise ConfigError("--x needs --y")
        return {"kind": "csv_pair", "x": args.x, "y": args.y}
    if args.mnist:
        return {"kind": "mnist_idx", "images": args.mnist}
    spec = _load_spec(args.synthetic)
    return {
        "kind": "synthetic", "dx": spec.dx, "dy": spec.dy,
        "n_samples": spec.n_samples,
        "canonical_correlations": list(spec.canonical_correlations),
        "noise_scale": spec.noise_scale, "seed": spec.seed,
    }


def _load_spec(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as err:
        raise ConfigError(str(err)) from None
    except json.JSONDecodeError as err:
        raise ConfigError("%s is not valid JSON: %s" % (path, err)) from None
    allowed = {"dx", "dy", "n_samples", "canonical_correlations", "noise_scale",
               "seed"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError("unknown key(s) %s in synthetic spec" % sorted(unknown))
    try:
        return SyntheticSpec(**raw)
    except (TypeError, ValueError) as err:
        raise ConfigError("bad synthetic spec: %s" % err) from None


def cmd_exact(args):
    dataset = build_dataset(_dataset_descriptor(args), args.gamma_x, args.gamma_y)
    summary = dataset_summary(dataset, exact_solution(dataset))
    print("rho1         %.12g" % summary["rho1"])
    print("rho2         %.12g" % summary["rho2"])
    print("gap          %.12g" % summary["gap"])
    print("kappa_tilde  %.12g" % summary["kappa_tilde"])
    print("kappa_prime  %.12g" % summary["kappa_prime"])
    if summary["delta_factor"] is None:
        print("delta_factor undefined (rho1 = rho2)")
    else:
        print("delta_factor %.12g" % summary["delta_factor"])
    return 0


def cmd_solve(args):
    dataset = build_dataset(_dataset_descriptor(args), args.gamma_x, args.gamma_y)
    reference = exact_solution(dataset)
    trace = run_cell(args.alg, dataset, reference, {"name": args.alg}, args.seed,
                     args.passes_max, args.eta)
    last = trace.final
    print("algorithm      %s" % args.alg)
    print("passes         %.3f" % last.pass_count)
    print("objective      %.12g   (rho1 = %.12g)" % (last.objective, reference.rho[0]))
    print("suboptimality  %.6g" % last.suboptimality)
    print("alignment      u %.8g   v %.8g" % (last.align_u, last.align_v))
    print("constraints    u %.12g   v %.12g" % (last.constraint_u, last.constraint_v))
    if args.csv:
        trace.write_csv(args.csv, extra_columns={"gamma_x": args.gamma_x,
                                                 "gamma_y": args.gamma_y})
        print("trace written to %s" % args.csv)
    if args.plot:
        cell = {"algorithm": args.alg, "gamma_x": args.gamma_x,
                "gamma_y": args.gamma_y, "trace": trace}
        emit_plot_script([cell], os.path.basename(args.csv or "trace.csv"), args.plot)
        print("plot script written to %s" % args.plot)
    return 0


def cmd_gen(args):
    spec = _load_spec(args.spec)
    dataset = generate_synthetic(spec)
    os.makedirs(args.out, exist_ok=True)
    px = os.path.join(args.out, "x.csv")
    py = os.path.join(args.out, "y.csv")
    save_csv_pair(dataset, px, py)
    print("wrote %s (%d x %d) and %s (%d x %d), N=%d"
          % (px, dataset.dx, dataset.n_samples, py, dataset.dy,
             dataset.n_samples, dataset.n_samples))
    return 0


def cmd_bench(args):
    config = ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.passes_max is not None:
        config.passes_max = args.passes_max
    out_dir = args.out or config.out
    if not out_dir:
        raise ConfigError("give --out or an 'out' entry in the config")
    cells, paths = run_experiment(config, out_dir, write_plot=not args.no_plot)
    failures = [c for c in cells if c["status"] != "ok"]
    for cell in cells:
        print("%-10s gamma=(%g, %g)  %s%s"
              % (cell["algorithm"], cell["gamma_x"], cell["gamma_y"],
                 cell["status"],
                 "" if not cell["message"] else ": " + cell["message"]))
    print("outputs in %s (combined: %s)" % (out_dir, paths["combined"]))
    return 0 if not failures else 3


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stochcca",
        description="Stochastic CCA solvers and the suboptimality-vs-passes benchmark.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="print rho1, rho2, gap and condition numbers")
    _add_dataset_args(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("solve", help="run one algorithm on a dataset")
    _add_dataset_args(p)
    p.add_argument("--alg", required=True, choices=ALG_CHOICES)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--passes-max", type=float, default=100.0)
    p.add_argument("--csv", help="write the run trace to this CSV")
    p.add_argument("--plot", help="write a plot script to this path")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", help="generate a synthetic dataset as CSV pair")
    p.add_argument("--spec", required=True, help="JSON synthetic spec")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run an experiment grid from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--seed", type=int)
    p.add_argument("--passes-max", type=float)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code if err.code is not None else 2
    try:
        return args.func(args)
    except (ConfigError, ValueError) as err:
        print("config error: %s" % err, file=sys.stderr)
        return 2
    except NumericFailure as err:
        print("numeric failure: %s" % err, file=sys.stderr)
        return 3
    except OSError as err:
        print("config error: %s" % err, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
