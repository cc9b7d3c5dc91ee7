"""Experiment runner: config parsing, command dispatch, artifact writing.

A run is described by a JSON config with a top-level ``command`` plus the
network, sweep, and seeding fields.  Every command writes a ``report.json``
whose ``payload`` section is a pure function of the config (rerunning with
the same config byte-reproduces it) and one CSV file per emitted table,
named ``<command>_<table>.csv``.  ``emit_plot_script`` turns a report into a
standalone matplotlib script next to the CSVs.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .activations import make_activation
from .freecalc import predict_fim_moments, predict_jacobian_moments
from .freeness import (
    alternating_freeness_test,
    cutoff_orthogonal_approx,
    cutoff_trace_check,
    freeness_moment_prediction_test,
    invariance_statistical_test,
    letter_diagonal_power,
    letter_rotated_jacobian_gram,
    letter_weight_symmetrized,
)
from .linalg import NumericalError, sample_haar_orthogonal
from .mlp import (
    MlpConfig,
    fim_dual_matrix,
    fim_recursion,
    input_jacobian_chain,
    parameter_jacobian_oracle,
    sample_network,
    sample_preactivations,
    theory_profile,
)
from .rng import SeededRng
from .spectral import empirical_moments, histogram, ks_distance_to_gaussian, spectrum_of

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "run",
    "run_config",
    "emit_plot_script",
    "COMMANDS",
]

EXIT_OK = 0
EXIT_TEST_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


class ConfigError(ValueError):
    """Config file missing, malformed, or carrying invalid field values."""


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    network: MlpConfig
    n_sweep: tuple[int, ...]
    trials: int
    seed: int
    moment_order: int
    output_dir: str
    tolerances: dict = field(default_factory=dict)
    target: str = "jacobian"
    layer: int | None = None
    bins: int = 32
    raw: dict = field(default_factory=dict, repr=False)

    def tolerance(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))


def _cfg_field(raw: dict, name: str, default, caster, validator=None):
    value = raw.get(name, default)
    try:
        value = caster(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config field {name!r}: {exc}") from exc
    if validator is not None:
        problem = validator(value)
        if problem:
            raise ConfigError(f"config field {name!r}: {problem}")
    return value


def parse_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    command = raw.get("command")
    if command not in COMMANDS:
        raise ConfigError(
            f"config field 'command': got {command!r}, expected one of {sorted(COMMANDS)}"
        )
    net = raw.get("network")
    if not isinstance(net, dict):
        raise ConfigError("config field 'network': must be an object")
    try:
        shift = float(net.get("activation_shift", 0.5))
        activation = net.get("activation", "tanh")
        if isinstance(activation, str):
            activation = make_activation(activation, shift=shift)
        elif isinstance(activation, (list, tuple)):
            activation = [make_activation(a, shift=shift) if isinstance(a, str) else a
                          for a in activation]
        network = MlpConfig(
            depth=net.get("depth", 1),
            width=net.get("width", 64),
            sigma_w=net.get("sigma_w", 1.0),
            activation=activation,
            input_radius=net.get("input_radius", 1.0),
            input_mode=net.get("input_mode", "unit_sphere_scaled"),
            quadrature_order=net.get("quadrature_order", 201),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config field 'network': {exc}") from exc

    n_sweep = _cfg_field(
        raw, "n_sweep", [network.width],
        lambda v: tuple(int(x) for x in v),
        lambda v: None if (v and list(v) == sorted(v) and v[0] >= 2)
        else "must be a nonempty ascending list of widths >= 2",
    )
    trials = _cfg_field(raw, "trials", 10, int,
                        lambda v: None if v >= 1 else "must be >= 1")
    seed = _cfg_field(raw, "seed", 0, int)
    moment_order = _cfg_field(raw, "moment_order", 4, int,
                              lambda v: None if v >= 1 else "must be >= 1")
    output_dir = _cfg_field(raw, "output_dir", "freejac-out", str)
    tolerances = raw.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise ConfigError("config field 'tolerances': must be an object")
    target = _cfg_field(raw, "target", "jacobian", str,
                        lambda v: None if v in ("jacobian", "fim", "fim_dual", "cfim_oracle")
                        else "must be one of jacobian, fim, fim_dual, cfim_oracle")
    layer = raw.get("layer")
    if layer is not None:
        layer = _cfg_field(raw, "layer", None, int,
                           lambda v: None if 1 <= v <= network.depth
                           else f"must be within 1..{network.depth}")
    bins = _cfg_field(raw, "bins", 32, int, lambda v: None if v >= 1 else "must be >= 1")
    return ExperimentConfig(
        command=command, network=network, n_sweep=n_sweep, trials=trials,
        seed=seed, moment_order=moment_order, output_dir=output_dir,
        tolerances=dict(tolerances), target=target, layer=layer, bins=bins,
        raw=dict(raw),
    )


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _cmd_theory_profile(cfg: ExperimentConfig, rng: SeededRng, threads: int):
    profile = theory_profile(cfg.network)
    rows = [
        {
            "layer": l + 1,
            "preact_variance": profile.preact_variances[l],
            "activation_rms": profile.activation_rms[l + 1],
        }
        for l in range(cfg.network.depth)
    ]
    tables = [{"name": "profile", "kind": "table",
               "columns": ["layer", "preact_variance", "activation_rms"], "rows": rows}]
    return {"input_rms": profile.activation_rms[0]}, tables, True


def _target_matrix(cfg: ExperimentConfig, state, layer: int):
    if cfg.target == "jacobian":
        jac = input_jacobian_chain(state, layer)
        return jac @ jac.T
    if cfg.target == "fim":
        return fim_recursion(state)[layer - 1]
    if cfg.target == "fim_dual":
        return fim_dual_matrix(state)
    oracle = parameter_jacobian_oracle(state)
    return oracle @ oracle.T / state.width


def _cmd_simulate_spectrum(cfg: ExperimentConfig, rng: SeededRng, threads: int):
    layer = cfg.layer or cfg.network.depth
    state = sample_network(cfg.network, rng.substream(0))
    spectrum = spectrum_of(_target_matrix(cfg, state, layer))
    hist = histogram(spectrum, cfg.bins)
    moments = empirical_moments(spectrum, cfg.moment_order)
    hist_rows = [
        {"bin_left": float(hist.bin_edges[i]), "bin_right": float(hist.bin_edges[i + 1]),
         "count": int(hist.counts[i])}
        for i in range(hist.counts.size)
    ]
    moment_rows = [
        {"moment_order": k + 1, "value": float(moments.moments[k])}
        for k in range(cfg.moment_order)
    ]
    results = {
        "target": cfg.target,
        "layer": layer,
        "eigenvalue_min": float(spectrum.eigenvalues[0]),
        "eigenvalue_max": float(spectrum.eigenvalues[-1]),
    }
    tables = [
        {"name": "histogram", "kind": "histogram",
         "columns": ["bin_left", "bin_right", "count"], "rows": hist_rows},
        {"name": "moments", "kind": "moments",
         "columns": ["moment_order", "value"], "rows": moment_rows},
    ]
    return results, tables, True


def _cmd_predict_vs_empirical(cfg: ExperimentConfig, rng: SeededRng, threads: int):
    net = cfg.network
    rel_tol = cfg.tolerance("moment_rel_tol", 0.05)
    se_mult = cfg.tolerance("moment_se_mult", 3.0)
    rows, passed = [], True
    jobs = [("jacobian", l) for l in range(1, net.depth + 1)]
    jobs += [("fim", l) for l in range(2, net.depth + 1)]
    for job_index, (target, layer) in enumerate(jobs):
        report = freeness_moment_prediction_test(
            net, layer, target, cfg.n_sweep, cfg.trials,
            rng.substream(job_index),
            order=cfg.moment_order, rel_tol=rel_tol, se_mult=se_mult,
        )
        passed = passed and report.passed
        for r in report.details["moments"]:
            rows.append({"target": target, "layer": layer, **r})
    tables = [{"name": "moments", "kind": "moments",
               "columns": ["target", "layer", "width", "moment_order", "empirical",
                           "stderr", "theory", "rel_err", "within_tolerance"],
               "rows": rows}]
    return {"rel_tol": rel_tol, "se_mult": se_mult}, tables, passed


def _freeness_words(net: MlpConfig):
    words = {"degree2_weight_vs_diagonal": [letter_weight_symmetrized(1),
                                            letter_diagonal_power(1, 2)]}
    if net.depth >= 2:
        words["degree4_weights_vs_diagonals"] = [
            letter_weight_symmetrized(1), letter_diagonal_power(1, 2),
            letter_weight_symmetrized(2), letter_diagonal_power(2, 2),
        ]
        words["degree4_jacobian_pair"] = [
            letter_rotated_jacobian_gram(1), letter_diagonal_power(2, 2),
            letter_rotated_jacobian_gram(1), letter_diagonal_power(2, 2),
        ]
    return words


def _cmd_verify_freeness(cfg: ExperimentConfig, rng: SeededRng, threads: int):
    net = cfg.network
    tol = cfg.tolerance("freeness_tol", 0.02)
    control_tol = cfg.tolerance("freeness_control_tol", 0.1)
    reports = []
    rows = []
    passed = True
    for i, (name, word) in enumerate(sorted(_freeness_words(net).items())):
        rep = alternating_freeness_test(word, net, cfg.n_sweep, cfg.trials,
                                        rng.substream(10 + i), tolerance=tol)
        reports.append((name, rep))
        passed = passed and rep.passed
    control = [letter_diagonal_power(1, 2, family="diag_copy_a"),
               letter_diagonal_power(1, 4, family="diag_copy_b")]
    rep = alternating_freeness_test(control, net, cfg.n_sweep, cfg.trials,
                                    rng.substream(99), tolerance=control_tol,
                                    expect_vanishing=False)
    reports.append(("negative_control_dependent_letters", rep))
    passed = passed and rep.passed
    for name, rep in reports:
        for i, n in enumerate(rep.widths):
            rows.append({"word": name, "width": n, "mean_abs_trace": rep.statistics[i],
                         "stderr": rep.standard_errors[i], "passed": rep.passed})
    tables = [{"name": "words", "kind": "sweep",
               "columns": ["word", "width", "mean_abs_trace", "stderr", "passed"],
               "rows": rows}]
    results = {name: rep.to_dict() for name, rep in reports}
    return results, tables, passed


def _cmd_verify_invariance(cfg: ExperimentConfig, rng: SeededRng, threads: int):
    z_threshold = cfg.tolerance("invariance_z_threshold", 4.0)
    normal = invariance_statistical_test(cfg.network, cfg.trials, rng.substream(0),
                                         z_threshold=z_threshold)
    control = invariance_statistical_test(cfg.network, cfg.trials, rng.substream(1),
                                          break_invariance=True, z_threshold=z_threshold)
    rows = []
    for label, rep in (("proper", normal), ("broken_control", control)):
        for probe in rep.details["probes"]:
            rows.append({"variant": label, **probe})
    tables = [{"name": "probes", "kind": "table",
               "columns": ["variant", "layer", "probe", "mean_difference", "stderr", "z"],
               "rows": rows}]
    passed = normal.passed and control.passed
    return {"proper": normal.to_dict(), "broken_control": control.to_dict()}, tables, passed


def _cmd_verify_cutoff(cfg: ExperimentConfig, rng: SeededRng, threads: int):
    word_lengths = [int(n) for n in cfg.tolerances.get("word_lengths", (1, 2, 3))]
    p_values = [int(p) for p in cfg.tolerances.get("p_values", (1, 2, 4))]
    rows = []
    passed = True
    for width in cfg.n_sweep:
        for n_word in word_lengths:
            gaps, bound = [], None
            violations = 0
            for t in range(cfg.trials):
                sub = rng.substream(width, n_word, t)
                mats = [sample_haar_orthogonal(sub, width) for _ in range(n_word)]
                try:
                    gap, bound = cutoff_trace_check(mats)
                except NumericalError:
                    violations += 1
                    continue
                gaps.append(gap)
            ok = violations == 0
            passed = passed and ok
            rows.append({"check": "trace_gap", "parameter": n_word, "width": width,
                         "instances": cfg.trials, "violations": violations,
                         "mean_lhs": float(np.mean(gaps)) if gaps else float("nan"),
                         "bound": float(bound) if bound is not None else float("nan")})
        for p in p_values:
            errors, bound = [], None
            violations = 0
            for t in range(cfg.trials):
                w = sample_haar_orthogonal(rng.substream(width, 1000 + p, t), width)
                try:
                    _, err, bound = cutoff_orthogonal_approx(w, p)
                except NumericalError:
                    violations += 1
                    continue
                errors.append(err)
            ok = violations == 0
            passed = passed and ok
            rows.append({"check": "orthogonal_approx", "parameter": p, "width": width,
                         "instances": cfg.trials, "violations": violations,
                         "mean_lhs": float(np.mean(errors)) if errors else float("nan"),
                         "bound": float(bound) if bound is not None else float("nan")})
    tables = [{"name": "grid", "kind": "table",
               "columns": ["check", "parameter", "width", "instances", "violations",
                           "mean_lhs", "bound"], "rows": rows}]
    return {"word_lengths": word_lengths, "p_values": p_values}, tables, passed


def _cmd_gaussian_propagation(cfg: ExperimentConfig, rng: SeededRng, threads: int):
    net = cfg.network
    ks_tol = cfg.tolerance("ks_tol", 0.05)
    profile = theory_profile(net)
    rows = []

    def one_seed(args):
        width, seed_index = args
        cfg_n = net.with_width(width)
        hidden = sample_preactivations(cfg_n, rng.substream(width, seed_index))
        return [
            ks_distance_to_gaussian(hidden[l], 0.0, profile.preact_variances[l])
            for l in range(net.depth)
        ]

    jobs = [(width, s) for width in cfg.n_sweep for s in range(cfg.trials)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            ks_values = list(pool.map(one_seed, jobs))
    else:
        ks_values = [one_seed(j) for j in jobs]
    by_width: dict[int, list[list[float]]] = {}
    for (width, seed_index), ks_list in zip(jobs, ks_values):
        by_width.setdefault(width, []).append(ks_list)
        for l, ks in enumerate(ks_list):
            rows.append({"width": width, "seed_index": seed_index, "layer": l + 1,
                         "ks_distance": ks,
                         "preact_variance": profile.preact_variances[l]})

    means = {width: np.mean(np.asarray(v), axis=0) for width, v in by_width.items()}
    widest = cfg.n_sweep[-1]
    small = cfg.n_sweep[0]
    below_tol = bool(np.all(means[widest] < ks_tol))
    shrinking = bool(np.all(means[widest] < means[small])) if widest != small else True
    passed = below_tol and shrinking
    summary_rows = [
        {"width": width, "layer": l + 1, "mean_ks": float(means[width][l])}
        for width in cfg.n_sweep for l in range(net.depth)
    ]
    tables = [
        {"name": "ks", "kind": "table",
         "columns": ["width", "seed_index", "layer", "ks_distance", "preact_variance"],
         "rows": rows},
        {"name": "ks_mean", "kind": "sweep",
         "columns": ["width", "layer", "mean_ks"], "rows": summary_rows},
    ]
    results = {"ks_tol": ks_tol, "below_tolerance": below_tol,
               "shrinks_with_width": shrinking}
    return results, tables, passed


def _cmd_fim_duality(cfg: ExperimentConfig, rng: SeededRng, threads: int):
    net = cfg.network
    state = sample_network(net, rng.substream(0))
    n, depth = net.width, net.depth
    oracle = parameter_jacobian_oracle(state)
    dual = oracle @ oracle.T / n
    small = np.sort(np.linalg.eigvalsh(dual))
    sing = np.linalg.svd(oracle, compute_uv=False)
    via_svd = np.sort(sing ** 2 / n)
    scale = max(np.max(np.abs(small)), 1e-300)
    eig_gap = float(np.max(np.abs(small - via_svd)) / scale)

    recursion_dual = fim_dual_matrix(state)
    dual_gap = float(np.max(np.abs(dual - recursion_dual)))
    tol = cfg.tolerance("duality_tol", 1e-9) * n

    param_count = depth * n * n
    zero_eigen_count = param_count - n
    rows = [{
        "width": n, "depth": depth, "parameter_count": param_count,
        "nonzero_eigenvalues": n, "zero_eigenvalues": zero_eigen_count,
        "max_eig_mismatch_rel": eig_gap, "max_dual_gap": dual_gap,
        "zero_mass": zero_eigen_count / param_count,
        "nonzero_mass": n / param_count,
    }]
    passed = eig_gap < 1e-9 and dual_gap < tol
    tables = [{"name": "duality", "kind": "table",
               "columns": list(rows[0].keys()), "rows": rows}]
    results = {
        "eigenvalues_match": bool(eig_gap < 1e-9),
        "dual_matches_recursion": bool(dual_gap < tol),
        "spectral_mass_at_zero": zero_eigen_count / param_count,
    }
    return results, tables, passed


COMMANDS = {
    "theory-profile": _cmd_theory_profile,
    "simulate-spectrum": _cmd_simulate_spectrum,
    "predict-vs-empirical": _cmd_predict_vs_empirical,
    "verify-freeness": _cmd_verify_freeness,
    "verify-invariance": _cmd_verify_invariance,
    "verify-cutoff": _cmd_verify_cutoff,
    "gaussian-propagation": _cmd_gaussian_propagation,
    "fim-duality": _cmd_fim_duality,
}


# ---------------------------------------------------------------------------
# orchestration
# ---------------------------------------------------------------------------


def run_config(raw: dict, out_dir: str | None = None, seed: int | None = None,
               threads: int | None = None) -> tuple[dict, int]:
    """Execute a parsed config; returns (report, exit_code) and writes artifacts."""
    if seed is not None:
        raw = {**raw, "seed": int(seed)}
    cfg = parse_config(raw)
    if out_dir is None:
        out_dir = cfg.output_dir
    if threads is None:
        threads = int(os.environ.get("FREEJAC_THREADS", "1"))
    rng = SeededRng(cfg.seed)

    started = time.perf_counter()
    results, tables, passed = COMMANDS[cfg.command](cfg, rng, max(threads, 1))
    elapsed = time.perf_counter() - started

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table_meta = []
    for table in tables:
        filename = f"{cfg.command}_{table['name']}.csv"
        _write_csv(out / filename, table["columns"], table["rows"])
        table_meta.append({"name": table["name"], "file": filename,
                           "kind": table["kind"], "columns": table["columns"]})

    payload = {
        "command": cfg.command,
        "config": cfg.raw,
        "seed": cfg.seed,
        "results": results,
        "tables": table_meta,
        "passed": bool(passed),
    }
    report = {
        "payload": payload,
        "meta": {
            "tool_version": __version__,
            "wall_clock_seconds": elapsed,
            "threads": threads,
        },
    }
    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    if table_meta:
        emit_plot_script(report, out)
    return report, (EXIT_OK if passed else EXIT_TEST_FAILURE)


def run(config_path: str, out_dir: str | None = None, seed: int | None = None,
        threads: int | None = None) -> int:
    """CLI entry: load the JSON config, run it, map errors to exit codes."""
    try:
        with open(config_path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        print(f"config error: cannot read {config_path}: {exc}")
        return EXIT_CONFIG_ERROR
    except json.JSONDecodeError as exc:
        print(f"config error: {config_path} is not valid JSON: {exc}")
        return EXIT_CONFIG_ERROR
    try:
        report, code = run_config(raw, out_dir=out_dir, seed=seed, threads=threads)
    except ConfigError as exc:
        print(f"config error: {exc}")
        return EXIT_CONFIG_ERROR
    except NumericalError as exc:
        print(f"numerical failure: {exc}")
        return EXIT_NUMERICAL_ERROR
    status = "PASS" if report["payload"]["passed"] else "FAIL"
    print(f"{report['payload']['command']}: {status} "
          f"({report['meta']['wall_clock_seconds']:.2f}s)")
    return code


def _write_csv(path: Path, columns, rows) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({c: _csv_value(row.get(c)) for c in columns})


def _csv_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


_PLOT_HEADER = '''#!/usr/bin/env python3
"""Auto-generated plotting script; run next to the CSV files it references."""
import csv
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).parent


def load(name):
    with open(HERE / name) as fh:
        return list(csv.DictReader(fh))


def is_float(v):
    try:
        float(v)
        return True
    except (TypeError, ValueError):
        return False


def plot_histogram(rows, name, out):
    fig, ax = plt.subplots()
    lefts = [float(r["bin_left"]) for r in rows]
    widths = [float(r["bin_right"]) - float(r["bin_left"]) for r in rows]
    counts = [int(r["count"]) for r in rows]
    ax.bar(lefts, counts, width=widths, align="edge", edgecolor="black")
    ax.set_xlabel("eigenvalue")
    ax.set_ylabel("count")
    ax.set_title(name)
    fig.savefig(out, dpi=150)


def plot_sweep(rows, name, value_col, out):
    fig, ax = plt.subplots()
    skip = {"width", value_col, "stderr", "passed", "seed_index"}
    label_cols = [c for c in rows[0] if c not in skip] if rows else []
    series = {}
    for r in rows:
        label = ",".join(str(r[c]) for c in label_cols) or "all"
        series.setdefault(label, []).append((float(r["width"]), float(r[value_col])))
    for label, pts in sorted(series.items()):
        pts.sort()
        ax.loglog([p[0] for p in pts], [max(p[1], 1e-300) for p in pts],
                  marker="o", label=label)
    ax.set_xlabel("width N")
    ax.set_ylabel(value_col)
    ax.legend(fontsize=6)
    ax.set_title(name)
    fig.savefig(out, dpi=150)


def plot_moments(rows, name, out):
    fig, ax = plt.subplots()
    if rows and "theory" in rows[0]:
        ks = list(range(len(rows)))
        ax.bar([k - 0.2 for k in ks], [float(r["empirical"]) for r in rows],
               width=0.4, label="empirical")
        ax.bar([k + 0.2 for k in ks], [float(r["theory"]) for r in rows],
               width=0.4, label="theory")
        ax.set_xticks(ks)
        labels = [f"{r.get('target', 'm')}:{r.get('layer', '')}:k{r['moment_order']}"
                  for r in rows]
        ax.set_xticklabels(labels, rotation=90, fontsize=5)
        ax.legend()
    else:
        ax.bar([int(r["moment_order"]) for r in rows],
               [float(r["value"]) for r in rows])
    ax.set_ylabel("moment")
    ax.set_title(name)
    fig.savefig(out, dpi=150)


def plot_table(rows, name, out):
    fig, ax = plt.subplots()
    numeric = [c for c in rows[0] if all(is_float(r[c]) for r in rows)] if rows else []
    for c in numeric:
        ax.plot([float(r[c]) for r in rows], marker=".", label=c)
    ax.legend(fontsize=6)
    ax.set_title(name)
    fig.savefig(out, dpi=150)

'''


def emit_plot_script(report: dict, out_dir) -> Path:
    """Write a self-contained matplotlib script drawing every table of a report."""
    tables = report.get("payload", {}).get("tables", [])
    if not tables:
        raise ValueError("report has no tables; nothing to plot")
    out = Path(out_dir)
    lines = [_PLOT_HEADER]
    for table in tables:
        png = f"plot_{table['name']}.png"
        call = {
            "histogram": f"plot_histogram(load({table['file']!r}), {table['name']!r}, HERE / {png!r})",
            "moments": f"plot_moments(load({table['file']!r}), {table['name']!r}, HERE / {png!r})",
        }.get(table["kind"])
        if call is None and table["kind"] == "sweep":
            value_col = next(
                c for c in reversed(table["columns"])
                if c not in ("passed", "stderr", "seed_index")
            )
            call = (f"plot_sweep(load({table['file']!r}), {table['name']!r}, "
                    f"{value_col!r}, HERE / {png!r})")
        elif call is None:
            call = f"plot_table(load({table['file']!r}), {table['name']!r}, HERE / {png!r})"
        lines.append(call)
    script = out / "plots.py"
    script.write_text("\n".join(lines) + "\n")
    return script
