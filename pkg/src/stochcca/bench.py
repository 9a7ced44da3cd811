"""Experiment orchestration: run algorithm grids, write CSVs, emit plots.

A bench run sweeps (gamma, algorithm) cells over one dataset, recording
suboptimality against the exact SVD oracle per pass. Output per cell is one
CSV, plus a combined CSV, a manifest of cell statuses, and a standalone
matplotlib script that renders one log-scale panel per gamma setting.

Determinism contract: identical config and seed produce byte-identical CSVs
(which is why wall-clock times never reach the CSVs).
"""

import json
import os
import time

import numpy as np

from .als import AlsConfig, run_als
from .appgrad import MinibatchConfig, run_appgrad, run_s_appgrad
from .core import NumericFailure, condition_numbers
from .datasets import load_csv_pair, load_mnist_idx_split
from .reference import exact_solution
from .shift_invert import SiConfig, run_si
from .synthetic import SyntheticSpec, generate_synthetic, planted_dataset
from .trace import CSV_FIELDS, RunTrace


class ConfigError(ValueError):
    """Malformed experiment configuration (unknown keys, bad values, files)."""


ALGORITHM_NAMES = ("als-vr", "als-avr", "als-agd", "si-vr", "si-avr",
                   "appgrad", "s-appgrad")

_TOP_KEYS = {"dataset", "gammas", "algorithms", "eta", "passes_max", "seed", "out"}
_DATASET_KEYS = {
    "synthetic": {"kind", "dx", "dy", "n_samples", "canonical_correlations",
                  "noise_scale", "seed"},
    "planted": {"kind", "dx", "dy", "n_samples", "canonical_correlations", "seed"},
    "csv_pair": {"kind", "x", "y"},
    "mnist_idx": {"kind", "images"},
}
_ALG_KEYS = {
    "als-vr": {"name", "epochs", "T", "eta", "inner_steps"},
    "als-avr": {"name", "epochs", "T", "eta", "inner_steps"},
    "als-agd": {"name", "epochs", "T", "eta"},
    "si-vr": {"name", "epochs_shrink", "epochs_final", "exit_threshold",
              "delta_tilde", "m1", "m2", "eta", "epsilon_tilde"},
    "si-avr": {"name", "epochs_shrink", "epochs_final", "exit_threshold",
               "delta_tilde", "m1", "m2", "eta", "epsilon_tilde"},
    "appgrad": {"name", "step_size", "steps"},
    "s-appgrad": {"name", "batch_size", "step_size", "steps"},
}


def _check_keys(mapping, allowed, where):
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError("unknown key(s) %s in %s (allowed: %s)"
                          % (sorted(unknown), where, sorted(allowed)))


class ExperimentConfig:
    """Validated bench configuration; see README for the JSON schema."""

    def __init__(self, dataset, gammas, algorithms, eta=None, passes_max=None,
                 seed=0, out=None):
        self.dataset = dataset
        self.gammas = [(float(a), float(b)) for a, b in gammas]
        self.algorithms = algorithms
        self.eta = eta
        self.passes_max = passes_max
        self.seed = int(seed)
        self.out = out
        if not self.algorithms:
            raise ConfigError("need at least one algorithm")
        if not self.gammas:
            raise ConfigError("need at least one (gamma_x, gamma_y) pair")
        for gx, gy in self.gammas:
            if gx < 0 or gy < 0:
                raise ConfigError("gamma values must be nonnegative")
        for alg in self.algorithms:
            name = alg.get("name")
            if name not in ALGORITHM_NAMES:
                raise ConfigError("unknown algorithm %r (known: %s)"
                                  % (name, ", ".join(ALGORITHM_NAMES)))
            _check_keys(alg, _ALG_KEYS[name], "algorithm %r" % name)

    @classmethod
    def from_mapping(cls, raw):
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        _check_keys(raw, _TOP_KEYS, "config root")
        for key in ("dataset", "gammas", "algorithms"):
            if key not in raw:
                raise ConfigError("config is missing required key %r" % key)
        ds = raw["dataset"]
        if not isinstance(ds, dict) or "kind" not in ds:
            raise ConfigError("dataset descriptor needs a 'kind'")
        kind = ds["kind"]
        if kind not in _DATASET_KEYS:
            raise ConfigError("unknown dataset kind %r (known: %s)"
                              % (kind, ", ".join(sorted(_DATASET_KEYS))))
        _check_keys(ds, _DATASET_KEYS[kind], "dataset descriptor")
        return cls(ds, raw["gammas"], raw["algorithms"], raw.get("eta"),
                   raw.get("passes_max"), raw.get("seed", 0), raw.get("out"))

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigError("%s is not valid JSON: %s" % (path, err)) from None
        return cls.from_mapping(raw)


def build_dataset(descriptor, gamma_x=0.0, gamma_y=0.0):
    """Materialize a dataset descriptor (synthetic, planted, CSV, idx)."""
    kind = descriptor["kind"]
    if kind == "synthetic":
        spec = SyntheticSpec(descriptor["dx"], descriptor["dy"],
                             descriptor["n_samples"],
                             descriptor["canonical_correlations"],
                             descriptor.get("noise_scale", 1.0),
                             descriptor.get("seed", 0))
        return generate_synthetic(spec, gamma_x, gamma_y)
    if kind == "planted":
        return planted_dataset(descriptor["canonical_correlations"],
                               descriptor["dx"], descriptor["dy"],
                               descriptor["n_samples"], gamma=gamma_x,
                               seed=descriptor.get("seed", 0))
    if kind == "csv_pair":
        return load_csv_pair(descriptor["x"], descriptor["y"], gamma_x, gamma_y)
    if kind == "mnist_idx":
        return load_mnist_idx_split(descriptor["images"], gamma_x, gamma_y)
    raise ConfigError("unknown dataset kind %r" % kind)


def _cell_seed(base_seed, gi, ai):
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=(gi, ai))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def run_cell(name, dataset, reference, params, seed, passes_max, eta):
    """Run one algorithm on one regularized dataset; returns its RunTrace."""
    params = dict(params)
    params.pop("name", None)
    if name in ("als-vr", "als-avr", "als-agd"):
        inner = {"als-vr": "svrg", "als-avr": "asvrg", "als-agd": "agd"}[name]
        cfg = AlsConfig(inner=inner, eta=eta or 0.1, epsilon_mode="geometric",
                        epochs=params.get("epochs", 4 if inner != "agd" else 8),
                        T=params.get("T", 100_000),
                        inner_steps=params.get("inner_steps"), seed=seed)
        return run_als(dataset, cfg, reference=reference, max_passes=passes_max,
                       algorithm_name=name).trace
    if name in ("si-vr", "si-avr"):
        inner = "svrg" if name == "si-vr" else "asvrg"
        delta_tilde = params.get("delta_tilde")
        if delta_tilde is None:
            delta_tilde = min(max(reference.gap, 1e-6), 1.0)  # oracle preset
        cfg = SiConfig(delta_tilde=delta_tilde, eta=eta or 0.1, mode="practical",
                       inner=inner,
                       m1=params.get("m1"), m2=params.get("m2"),
                       epsilon_tilde=params.get("epsilon_tilde"),
                       exit_threshold=params.get("exit_threshold"),
                       epochs_shrink=params.get("epochs_shrink", 2),
                       epochs_final=params.get("epochs_final", 4), seed=seed)
        return run_si(dataset, cfg, reference=reference, max_passes=passes_max,
                      algorithm_name=name).trace
    if name == "appgrad":
        return run_appgrad(dataset, steps=params.get("steps"),
                           max_passes=passes_max,
                           step_size=params.get("step_size"), seed=seed,
                           reference=reference, algorithm_name=name).trace
    if name == "s-appgrad":
        mb = MinibatchConfig(params.get("batch_size", 100),
                             params.get("step_size"), params.get("steps"), seed)
        return run_s_appgrad(dataset, mb, max_passes=passes_max,
                             reference=reference, algorithm_name=name).trace
    raise ConfigError("unknown algorithm %r" % name)


def run_experiment(config, out_dir, write_plot=True):
    """Execute the full grid; one CSV per cell plus combined, manifest, plot.

    Cell failures are recorded in the manifest with their message and the
    remaining cells still run.
    """
    os.makedirs(out_dir, exist_ok=True)
    base = build_dataset(config.dataset)
    cells = []
    for gi, (gx, gy) in enumerate(config.gammas):
        dataset = base.with_gammas(gx, gy)
        try:
            reference = exact_solution(dataset)
        except Exception as err:  # reference failures poison the whole panel
            reference = None
            ref_error = str(err)
        for ai, alg in enumerate(config.algorithms):
            name = alg["name"]
            cell = {"algorithm": name, "gamma_x": gx, "gamma_y": gy,
                    "trace": None, "status": "ok", "message": "",
                    "wall_time": 0.0}
            started = time.perf_counter()
            if reference is None:
                cell["status"] = "error"
                cell["message"] = "reference oracle failed: %s" % ref_error
            else:
                try:
                    cell["trace"] = run_cell(
                        name, dataset, reference, alg,
                        _cell_seed(config.seed, gi, ai),
                        config.passes_max, config.eta)
                except NumericFailure as err:
                    cell["status"] = "numeric-failure"
                    cell["message"] = str(err)
            cell["wall_time"] = time.perf_counter() - started
            cells.append(cell)

    paths = write_outputs(cells, out_dir, write_plot=write_plot)
    return cells, paths


def cell_filename(cell):
    return "%s_gx%g_gy%g.csv" % (cell["algorithm"], cell["gamma_x"], cell["gamma_y"])


def write_outputs(cells, out_dir, write_plot=True):
    import csv as _csv

    paths = {"cells": []}
    combined = os.path.join(out_dir, "combined.csv")
    with open(combined, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["gamma_x", "gamma_y"] + CSV_FIELDS)
        for cell in cells:
            if cell["trace"] is None:
                continue
            path = os.path.join(out_dir, cell_filename(cell))
            cell["trace"].write_csv(path, extra_columns={
                "gamma_x": cell["gamma_x"], "gamma_y": cell["gamma_y"]})
            paths["cells"].append(path)
            for row in cell["trace"]:
                writer.writerow([repr(cell["gamma_x"]), repr(cell["gamma_y"])]
                                + [repr(getattr(row, f)) if isinstance(getattr(row, f), float)
                                   else str(getattr(row, f)) for f in CSV_FIELDS])
    paths["combined"] = combined

    manifest = os.path.join(out_dir, "runs.csv")
    with open(manifest, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["algorithm", "gamma_x", "gamma_y", "status", "message",
                         "rows", "final_suboptimality"])
        for cell in cells:
            tr = cell["trace"]
            writer.writerow([
                cell["algorithm"], repr(cell["gamma_x"]), repr(cell["gamma_y"]),
                cell["status"], cell["message"],
                len(tr) if tr is not None else 0,
                repr(tr.final.suboptimality) if tr is not None and tr.final else ""])
    paths["manifest"] = manifest

    if write_plot:
        plot = os.path.join(out_dir, "plot_suboptimality.py")
        emit_plot_script(cells, "combined.csv", plot)
        paths["plot"] = plot
    return paths


def emit_plot_script(cells, combined_csv, out_path):
    """Write a standalone matplotlib script: one panel per gamma setting,
    log-scale suboptimality vs passes, one curve per algorithm.

    Panels whose cells produced no suboptimality data are omitted with a
    warning comment so the script always runs clean.
    """
    panels = []
    seen = set()
    for cell in cells:
        key = (cell["gamma_x"], cell["gamma_y"])
        if key in seen:
            continue
        seen.add(key)
        group = [c for c in cells
                 if (c["gamma_x"], c["gamma_y"]) == key]
        algorithms = sorted({c["algorithm"] for c in group
                             if c["trace"] is not None and len(c["trace"])})
        panels.append({"gamma_x": key[0], "gamma_y": key[1],
                       "algorithms": algorithms})

    lines = [
        "#!/usr/bin/env python3",
        '"""Suboptimality vs. passes, one panel per regularization setting.',
        "",
        "Auto-generated companion to %s; run it from the same directory." % combined_csv,
        '"""',
        "import csv",
        "from collections import defaultdict",
        "",
        "import matplotlib",
        'matplotlib.use("Agg")',
        "import matplotlib.pyplot as plt",
        "",
        "FLOOR = 1e-16  # log axis needs positive values",
        "",
        "series = defaultdict(lambda: ([], []))",
        'with open("%s", newline="") as fh:' % combined_csv,
        "    for row in csv.DictReader(fh):",
        '        key = (float(row["gamma_x"]), float(row["gamma_y"]), row["algorithm"])',
        '        series[key][0].append(float(row["pass_count"]))',
        '        series[key][1].append(max(float(row["suboptimality"]), FLOOR))',
        "",
    ]
    drawn = [p for p in panels if p["algorithms"]]
    for p in panels:
        if not p["algorithms"]:
            lines.append("# warning: panel gamma_x=%g gamma_y=%g omitted "
                         "(no suboptimality data)" % (p["gamma_x"], p["gamma_y"]))
    lines.append("")
    lines.append("panels = %r" % [(p["gamma_x"], p["gamma_y"], p["algorithms"])
                                  for p in drawn])
    lines += [
        "if panels:",
        "    fig, axes = plt.subplots(1, len(panels),",
        "                             figsize=(4.2 * len(panels), 3.4), squeeze=False)",
        "    for ax, (gx, gy, algs) in zip(axes[0], panels):",
        "        for alg in algs:",
        "            passes, subopt = series[(gx, gy, alg)]",
        "            ax.plot(passes, subopt, label=alg)",
        '        ax.set_yscale("log")',
        '        ax.set_xlabel("# passes")',
        '        ax.set_ylabel("suboptimality")',
        '        ax.set_title("gamma_x=%g, gamma_y=%g" % (gx, gy))',
        "        ax.legend(fontsize=7)",
        "    fig.tight_layout()",
        '    fig.savefig("suboptimality_vs_passes.png", dpi=150)',
        '    print("wrote suboptimality_vs_passes.png")',
        "else:",
        '    print("nothing to plot")',
        "",
    ]
    with open(out_path, "w") as fh:
        fh.write("\n".join(lines))
    return out_path


def dataset_summary(dataset, reference):
    """The numbers the `exact` subcommand prints."""
    cn = condition_numbers(dataset, reference)
    rho2 = float(reference.rho[1]) if reference.rho.shape[0] > 1 else 0.0
    return {
        "rho1": float(reference.rho[0]),
        "rho2": rho2,
        "gap": float(reference.rho[0]) - rho2,
        "kappa_tilde": cn["kappa_tilde"],
        "kappa_prime": cn["kappa_prime"],
        "kappa": cn["kappa"],
        "delta_factor": cn["delta_factor"],
    }
