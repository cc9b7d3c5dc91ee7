"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete.  Every tolerance is pinned here; nothing is
calibrated at runtime.
"""

import json
import math
import time

import numpy as np
import pytest

from freejac import (
    MlpConfig,
    MomentSeries,
    SeededRng,
    alternating_freeness_test,
    backward_chains,
    cutoff_orthogonal_approx,
    cutoff_trace_check,
    fim_dual_matrix,
    fim_recursion,
    free_multiplicative_convolution,
    freeness_moment_prediction_test,
    invariance_statistical_test,
    ks_distance_to_gaussian,
    letter_diagonal_power,
    letter_rotated_jacobian_gram,
    letter_weight_symmetrized,
    moments_from_s,
    normalized_trace,
    parameter_jacobian_oracle,
    s_transform,
    sample_gaussian_matrix,
    sample_haar_orthogonal,
    sample_network,
    sample_preactivations,
    schatten_norm,
    svd,
    symmetric_eigen,
    theory_profile,
)
from freejac.harness import run_config

SQRT2 = math.sqrt(2.0)


def announce(number: int, name: str, ok: bool, started: float,
             budget_seconds: float | None = None, detail: str = "") -> bool:
    """Print the criterion's pass/fail line; fold the wall-clock budget into
    the verdict when one is stated."""
    elapsed = time.perf_counter() - started
    if budget_seconds is not None:
        ok = bool(ok) and elapsed < budget_seconds
        timing = f"{elapsed:.1f}s of {budget_seconds:.0f}s"
    else:
        timing = f"{elapsed:.1f}s"
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail}; {timing})" if detail else f" ({timing})"
    print(f"ACCEPTANCE {number} [{name}]: {status}{suffix}", flush=True)
    return ok


# ---------------------------------------------------------------------------
# 1. Haar / linear-algebra suite at N in {16, 64, 256}
# ---------------------------------------------------------------------------


def test_criterion_1_haar_linalg_suite():
    started = time.perf_counter()
    rng = SeededRng(101)
    ok = True
    for n in (16, 64, 256):
        q = sample_haar_orthogonal(rng.substream(n, 0), n)
        ok &= np.linalg.norm(q.T @ q - np.eye(n)) < 1e-12 * n

        g = sample_gaussian_matrix(rng.substream(n, 1), n, n, 1.0)
        a = (g + g.T) / 2
        eig = symmetric_eigen(a)
        ok &= eig.residual(a) < 1e-8 * n * np.max(np.abs(a))
        ok &= np.linalg.norm(eig.eigenvectors.T @ eig.eigenvectors - np.eye(n)) < 1e-10 * np.sqrt(n)
        ok &= bool(np.all(np.diff(eig.eigenvalues) >= 0))

        u, s, v = svd(g)
        ok &= np.linalg.norm(u @ np.diag(s) @ v.T - g) < 1e-9 * np.linalg.norm(g)
        ok &= bool(np.all(np.diff(s) <= 0))

        b = sample_gaussian_matrix(rng.substream(n, 2), n, n, 1.0)
        lhs, rhs = normalized_trace(a @ b), normalized_trace(b @ a)
        ok &= abs(lhs - rhs) < 1e-12 * max(1.0, abs(lhs))
        ok &= schatten_norm(a @ b, 1) <= schatten_norm(a, 2) * schatten_norm(b, 2) + 1e-12
    ok = announce(1, "haar-linalg", ok, started, 30)
    assert ok


# ---------------------------------------------------------------------------
# 2. Gaussian propagation of hidden units (KS sweep)
# ---------------------------------------------------------------------------


def test_criterion_2_gaussian_propagation():
    started = time.perf_counter()
    seeds = 10
    ok = True
    details = []
    for kind in ("tanh", "relu"):
        cfg = MlpConfig(depth=4, width=4096, sigma_w=SQRT2, activation=kind)
        q = theory_profile(cfg).preact_variances
        ks = {}
        for width in (256, 4096):
            cfg_n = cfg.with_width(width)
            per_seed = np.array([
                [ks_distance_to_gaussian(h, 0.0, q[l]) for l, h in
                 enumerate(sample_preactivations(cfg_n, SeededRng(200).substream(width, s)))]
                for s in range(seeds)
            ])
            ks[width] = per_seed.mean(axis=0)
        ok &= bool(np.all(ks[4096] < 0.05))
        ok &= bool(np.all(ks[4096] < ks[256]))
        details.append(f"{kind}: max mean KS@4096 = {ks[4096].max():.4f}")
    ok = announce(2, "gaussian-propagation", ok, started, 120, "; ".join(details))
    assert ok


# ---------------------------------------------------------------------------
# 3. Invariance of the MLP under fixing rotations
# ---------------------------------------------------------------------------


def test_criterion_3_invariance():
    started = time.perf_counter()
    trials = 10_000
    ok = True
    worst = 0.0
    for depth in (1, 3):
        cfg = MlpConfig(depth=depth, width=16, sigma_w=SQRT2, activation="tanh")
        report = invariance_statistical_test(cfg, trials, SeededRng(300 + depth))
        ok &= report.passed
        worst = max(worst, report.statistics[0])
    control_cfg = MlpConfig(depth=1, width=16, sigma_w=SQRT2, activation="tanh")
    control = invariance_statistical_test(control_cfg, trials, SeededRng(310),
                                          break_invariance=True)
    ok &= control.passed and control.statistics[0] > 4.0
    ok = announce(3, "invariance", ok, started, 120,
                  f"max |z| proper = {worst:.2f}, control z = {control.statistics[0]:.1f}")
    assert ok


# ---------------------------------------------------------------------------
# 4. Cutoff inequalities on 100 instances per grid point
# ---------------------------------------------------------------------------


def test_criterion_4_cutoff_bounds():
    started = time.perf_counter()
    instances = 100
    rng = SeededRng(400)
    violations = 0
    for width in (16, 64, 256):
        for n_word in (1, 2, 3):
            for t in range(instances):
                sub = rng.substream(width, n_word, t)
                mats = [sample_haar_orthogonal(sub, width) for _ in range(n_word)]
                gap, bound = cutoff_trace_check(mats)
                violations += gap > bound
        for p in (1, 2, 4):
            for t in range(instances):
                w = sample_haar_orthogonal(rng.substream(width, 100 + p, t), width)
                _, err, bound = cutoff_orthogonal_approx(w, p)
                violations += err > bound
    ok = violations == 0
    ok = announce(4, "cutoff", ok, started, 60,
                  f"violations = {violations} of {instances * 3 * 6}")
    assert ok


# ---------------------------------------------------------------------------
# 5. Alternating freeness words with monotone decay
# ---------------------------------------------------------------------------


def test_criterion_5_alternating_freeness():
    started = time.perf_counter()
    cfg = MlpConfig(depth=2, width=512, sigma_w=SQRT2, activation="relu")
    sweep = [64, 128, 256, 512]
    trials = 20
    words = {
        "degree2": [letter_weight_symmetrized(1), letter_diagonal_power(1, 2)],
        "degree4": [letter_weight_symmetrized(1), letter_diagonal_power(1, 2),
                    letter_weight_symmetrized(2), letter_diagonal_power(2, 2)],
        "degree4_jacobian_pair": [
            letter_rotated_jacobian_gram(1), letter_diagonal_power(2, 2),
            letter_rotated_jacobian_gram(1), letter_diagonal_power(2, 2),
        ],
    }
    ok = True
    details = []
    for name, word in sorted(words.items()):
        report = alternating_freeness_test(word, cfg, sweep, trials,
                                           SeededRng(500 + len(name)), tolerance=0.02)
        ok &= report.passed
        details.append(f"{name}@512 = {report.statistics[-1]:.4f}")
    control = alternating_freeness_test(
        [letter_diagonal_power(1, 2, family="copy_a"),
         letter_diagonal_power(1, 4, family="copy_b")],
        cfg, sweep, trials, SeededRng(599), tolerance=0.1, expect_vanishing=False)
    ok &= control.passed
    details.append(f"dependent control@512 = {control.statistics[-1]:.3f} > 0.1")
    ok = announce(5, "alternating-freeness", ok, started, 300, "; ".join(details))
    assert ok


# ---------------------------------------------------------------------------
# 6. S-transform engine: roundtrip, closed form, matrix oracle
# ---------------------------------------------------------------------------


def test_criterion_6_s_transform_engine():
    started = time.perf_counter()
    ok = True
    # roundtrip at K = 10, exact to 1e-10
    rng = SeededRng(600)
    for i in range(5):
        atoms = rng.generator.uniform(0.2, 3.0, size=4)
        weights = rng.generator.dirichlet(np.ones(4))
        m = MomentSeries([float(np.sum(weights * atoms ** k)) for k in range(1, 11)])
        back = moments_from_s(s_transform(m))
        ok &= np.max(np.abs(back.moments - m.moments)) < 1e-10 * max(1.0, np.max(np.abs(m.moments)))

    # Bernoulli closed form (z+1)/(gamma (z+alpha)), coefficientwise to 1e-12
    alpha, gamma = 0.5, 1.0
    bern = MomentSeries([(1 - alpha) * gamma ** k for k in range(1, 11)])
    s = s_transform(bern).coefficients
    direct = np.array([(-1.0 / alpha) ** k / (gamma * alpha) for k in range(11)])
    expected = direct[:10].copy()
    expected[1:] += direct[:9]
    ok &= np.max(np.abs(s - expected)) < 1e-12

    # b boxtimes b against the hand formula and the N = 4096 matrix oracle
    conv = free_multiplicative_convolution(bern, bern)
    ok &= abs(conv.moment(1) - 0.25) < 1e-12
    ok &= abs(conv.moment(2) - 3.0 / 16.0) < 1e-12

    # oracle: independent Bernoulli diagonals, one Haar-conjugated
    n, trials = 4096, 4
    samples = np.empty((trials, 2))
    for t in range(trials):
        sub = SeededRng(601).substream(t)
        diag_a = (sub.generator.random(n) < 0.5).astype(float)
        diag_b = (sub.generator.random(n) < 0.5).astype(float)
        q = sample_haar_orthogonal(sub, n)
        prod = diag_a[:, None] * (q * diag_b[None, :]) @ q.T
        samples[t, 0] = normalized_trace(prod)
        samples[t, 1] = normalized_trace(prod @ prod)
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / np.sqrt(trials)
    z1 = abs(mean[0] - 0.25) / se[0]
    z2 = abs(mean[1] - 3.0 / 16.0) / se[1]
    ok &= z1 < 3.0 and z2 < 3.0
    ok = announce(6, "s-transform", ok, started, 60, f"oracle z = ({z1:.2f}, {z2:.2f})")
    assert ok


# ---------------------------------------------------------------------------
# 7. Input-Jacobian spectrum prediction at N = 1024, L = 3
# ---------------------------------------------------------------------------


def test_criterion_7_jacobian_spectrum_prediction():
    started = time.perf_counter()
    ok = True
    details = []
    for kind_index, (kind, sigma) in enumerate((("relu", SQRT2), ("hard_tanh", 1.0))):
        cfg = MlpConfig(depth=3, width=1024, sigma_w=sigma, activation=kind)
        for layer in (1, 2, 3):
            report = freeness_moment_prediction_test(
                cfg, layer, "jacobian", [1024], trials=6,
                rng=SeededRng(700).substream(kind_index, layer),
                order=4, rel_tol=0.05, se_mult=3.0)
            ok &= report.passed
        details.append(f"{kind}: worst rel err = {report.statistics[-1]:.3f}")
    ok = announce(7, "jacobian-spectrum", ok, started, 180, "; ".join(details))
    assert ok


# ---------------------------------------------------------------------------
# 8. FIM pipeline: recursion, oracle duality, spectrum prediction
# ---------------------------------------------------------------------------


def test_criterion_8_fim_pipeline():
    started = time.perf_counter()
    ok = True
    # (a) recursion equals the backward-chain sum at N = 64, L = 4
    cfg_a = MlpConfig(depth=4, width=64, sigma_w=SQRT2, activation="relu")
    state = sample_network(cfg_a, SeededRng(800))
    chains = backward_chains(state)
    msq = state.mean_square_activations
    total = sum(msq[l] * chains[l] @ chains[l].T for l in range(4))
    gap_a = float(np.max(np.abs(fim_recursion(state)[-1] - total)))
    ok &= gap_a < 1e-9 * 64

    # (b) the dense parameter-Jacobian oracle reproduces D_L H_L D_L at N = 32, L = 3
    cfg_b = MlpConfig(depth=3, width=32, sigma_w=SQRT2, activation="tanh")
    state_b = sample_network(cfg_b, SeededRng(801))
    oracle = parameter_jacobian_oracle(state_b)
    dual = oracle @ oracle.T / 32
    gap_b = float(np.max(np.abs(dual - fim_dual_matrix(state_b))))
    ok &= gap_b < 1e-9 * 32

    # (c) eigenvalue bookkeeping: LN^2 - N zeros plus the N dual eigenvalues
    sing = np.linalg.svd(oracle, compute_uv=False)
    nonzero_via_svd = np.sort(sing ** 2 / 32)
    dual_eigs = np.sort(np.linalg.eigvalsh(dual))
    scale = max(np.max(np.abs(dual_eigs)), 1e-300)
    ok &= float(np.max(np.abs(nonzero_via_svd - dual_eigs))) < 1e-9 * scale * 32
    params = 3 * 32 * 32
    ok &= oracle.shape == (32, params)  # rank <= N so >= LN^2 - N zeros
    cfg_small = MlpConfig(depth=2, width=8, sigma_w=1.0, activation="tanh")
    state_small = sample_network(cfg_small, SeededRng(802))
    oracle_small = parameter_jacobian_oracle(state_small)
    big = oracle_small.T @ oracle_small / 8
    big_eigs = np.sort(np.linalg.eigvalsh(big))
    zeros = 2 * 8 * 8 - 8
    ok &= float(np.max(np.abs(big_eigs[:zeros]))) < 1e-9
    small_eigs = np.sort(np.linalg.eigvalsh(oracle_small @ oracle_small.T / 8))
    ok &= float(np.max(np.abs(big_eigs[zeros:] - small_eigs))) < 1e-9

    # (d) H_3 spectrum moments match the free prediction at N = 2048
    cfg_d = MlpConfig(depth=3, width=2048, sigma_w=SQRT2, activation="relu")
    report = freeness_moment_prediction_test(cfg_d, 3, "fim", [2048], trials=5,
                                             rng=SeededRng(803), order=4,
                                             rel_tol=0.05, se_mult=3.0)
    ok &= report.passed
    ok = announce(8, "fim-pipeline", ok, started, 180,
                  f"chain gap = {gap_a:.2e}, oracle gap = {gap_b:.2e}, "
                  f"H3 worst rel err = {report.statistics[-1]:.3f}")
    assert ok


# ---------------------------------------------------------------------------
# 9. Determinism of harness reruns
# ---------------------------------------------------------------------------


def test_criterion_9_determinism(tmp_path):
    started = time.perf_counter()
    configs = [
        {"command": "verify-cutoff",
         "network": {"depth": 1, "width": 16, "sigma_w": 1.0, "activation": "tanh"},
         "n_sweep": [16, 32], "trials": 10, "seed": 5},
        {"command": "gaussian-propagation",
         "network": {"depth": 2, "width": 256, "sigma_w": SQRT2, "activation": "tanh"},
         "n_sweep": [64, 256], "trials": 5, "seed": 6, "tolerances": {"ks_tol": 0.5}},
        {"command": "theory-profile",
         "network": {"depth": 3, "width": 32, "sigma_w": SQRT2, "activation": "relu"},
         "seed": 7},
    ]
    ok = True
    for i, raw in enumerate(configs):
        r1, _ = run_config(raw, out_dir=tmp_path / f"a{i}")
        r2, _ = run_config(raw, out_dir=tmp_path / f"b{i}")
        bytes1 = json.dumps(r1["payload"], sort_keys=True).encode()
        bytes2 = json.dumps(r2["payload"], sort_keys=True).encode()
        ok &= bytes1 == bytes2
        csv_name = f"{raw['command']}_" \
                   + {"verify-cutoff": "grid", "gaussian-propagation": "ks",
                      "theory-profile": "profile"}[raw["command"]] + ".csv"
        ok &= (tmp_path / f"a{i}" / csv_name).read_bytes() == \
              (tmp_path / f"b{i}" / csv_name).read_bytes()
    ok = announce(9, "determinism", ok, started)
    assert ok
