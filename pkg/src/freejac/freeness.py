"""Statistical verification of invariance, cutoff bounds, and asymptotic freeness.

Three families of checks live here:

* ``build_invariance_rotation`` constructs, for a nonzero vector x, an
  orthogonal matrix that fixes x while rotating its orthogonal complement by
  an independent Haar block.  ``invariance_statistical_test`` then verifies
  that right-multiplying each layer weight by such a rotation leaves the
  joint law of (weights, preactivations) unchanged, probing with a fixed
  trace functional, a fixed vector functional, cross products with the
  hidden layer, and entry-level moments.  A deliberately broken rotation
  (one that moves x) must trip the same probes, which is the suite's power
  check.

* ``cutoff_trace_check`` and ``cutoff_orthogonal_approx`` evaluate the two
  deterministic compression inequalities: dropping the last coordinate
  changes normalized traces of bounded words by at most n C^n / N^(1/n),
  and the compressed corner of an orthogonal matrix is within
  (N-1)^(-1/p) of an exactly orthogonal one in the corner-normalized
  Schatten p-norm.

* ``alternating_freeness_test`` estimates |tr| of centered alternating
  words across a width sweep; asymptotic freeness predicts decay to zero.
  ``freeness_moment_prediction_test`` compares empirical spectra against
  the free-convolution predictions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .freecalc import predict_fim_moments, predict_jacobian_moments
from .linalg import (
    NumericalError,
    normalized_trace,
    sample_haar_orthogonal,
    schatten_norm,
)
from .mlp import MlpConfig, NetworkState, fim_recursion, input_jacobian_chain, sample_network
from .rng import SeededRng
from .spectral import empirical_moments, spectrum_of

__all__ = [
    "InvarianceArtifacts",
    "FreenessReport",
    "WordLetter",
    "build_invariance_rotation",
    "invariance_statistical_test",
    "cutoff_trace_check",
    "cutoff_orthogonal_approx",
    "alternating_freeness_test",
    "freeness_moment_prediction_test",
    "letter_weight_symmetrized",
    "letter_diagonal_power",
    "letter_rotated_jacobian_gram",
]


# ---------------------------------------------------------------------------
# invariance construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InvarianceArtifacts:
    """Orthogonal matrices built around a vector x.

    ``align_to_axis`` maps x/||x|| to the last standard basis vector;
    ``fixing_rotation`` fixes x and acts on its orthogonal complement by the
    Haar-distributed ``complement_block``.  ``pivot_index`` is the first
    coordinate of x that is numerically nonzero (it is the basis vector
    dropped when completing x to a basis).
    """

    align_to_axis: np.ndarray
    fixing_rotation: np.ndarray
    complement_block: np.ndarray
    pivot_index: int


def _reverse_orthonormalize(columns: np.ndarray) -> np.ndarray:
    """Gram-Schmidt over columns processed right to left, with one
    re-orthogonalization pass per column (plain GS loses orthogonality
    already at moderate sizes)."""
    n = columns.shape[1]
    out = np.zeros_like(columns)
    for i in range(n - 1, -1, -1):
        v = columns[:, i].copy()
        if i < n - 1:
            tail = out[:, i + 1 :]
            for _ in range(2):
                v -= tail @ (tail.T @ v)
        norm = np.linalg.norm(v)
        if norm < 1e-12:
            raise NumericalError(
                f"basis completion degenerate at column {i}: residual norm {norm:.3e}"
            )
        out[:, i] = v / norm
    return out


def build_invariance_rotation(x, rng: SeededRng) -> InvarianceArtifacts:
    """Construct the orthogonal matrix fixing x with a Haar-rotated complement.

    The completion basis is (e_1, ..., e_{p-1}, e_{p+1}, ..., e_N, x/||x||)
    where p is the first coordinate with |x_p| > 1e-12 ||x||; orthogonalizing
    right to left keeps x/||x|| as the last basis vector exactly.
    """
    x = np.asarray(x, dtype=np.float64)
    norm = np.linalg.norm(x)
    if not np.isfinite(norm) or norm == 0.0:
        raise ValueError("x is numerically zero (or non-finite); no rotation exists")
    n = x.size
    nonzero = np.flatnonzero(np.abs(x) > 1e-12 * norm)
    if nonzero.size == 0:
        raise ValueError("x is numerically zero relative to its norm")
    pivot = int(nonzero[0])

    basis = np.zeros((n, n))
    cols = [i for i in range(n) if i != pivot]
    for slot, i in enumerate(cols):
        basis[i, slot] = 1.0
    basis[:, n - 1] = x / norm
    frame = _reverse_orthonormalize(basis)

    align = frame.T
    block = sample_haar_orthogonal(rng, n - 1)
    rotated = align.copy()
    rotated[: n - 1, :] = block @ align[: n - 1, :]
    fixing = align.T @ rotated
    return InvarianceArtifacts(
        align_to_axis=align,
        fixing_rotation=fixing,
        complement_block=block,
        pivot_index=pivot,
    )


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FreenessReport:
    """Per-width statistics of one verification run.

    ``statistics[i]`` is the test's scalar observable at ``widths[i]`` (mean
    absolute centered trace for word tests, worst z-score for invariance,
    worst relative error for moment predictions); ``standard_errors`` are the
    matching Monte-Carlo errors.  ``words`` labels what was tested and
    ``details`` carries the full table for serialization.
    """

    test_name: str
    widths: tuple[int, ...]
    statistics: tuple[float, ...]
    standard_errors: tuple[float, ...]
    words: tuple[str, ...]
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "test_name": self.test_name,
            "widths": list(self.widths),
            "statistics": list(self.statistics),
            "standard_errors": list(self.standard_errors),
            "words": list(self.words),
            "passed": bool(self.passed),
            "details": self.details,
        }


# ---------------------------------------------------------------------------
# invariance statistical test
# ---------------------------------------------------------------------------

_PROBE_NAMES = (
    "trace_probe",
    "trace_probe_sq",
    "vector_probe",
    "vector_probe_sq",
    "trace_probe_x_hidden",
    "vector_probe_x_hidden",
    "entry_mean",
    "entry_sq_mean",
)


def _probe_values(m: np.ndarray, x_prev: np.ndarray, h: np.ndarray,
                  t_probe: np.ndarray, xi: np.ndarray) -> np.ndarray:
    u = float(np.sum(t_probe * m))
    v = float(xi @ (m @ x_prev))
    hdot = float(xi @ h)
    return np.array([
        u,
        u * u,
        v,
        v * v,
        u * hdot,
        v * hdot,
        float(np.mean(m)),
        float(np.mean(m * m)),
    ])


def invariance_statistical_test(cfg: MlpConfig, trials: int, rng: SeededRng,
                                break_invariance: bool = False,
                                z_threshold: float = 4.0) -> FreenessReport:
    """Compare probe statistics of (W_l U_{l-1}, h_l) against (W_l, h_l).

    With a proper fixing rotation every paired difference must sit within
    ``z_threshold`` standard errors of zero.  With ``break_invariance`` the
    rotation is replaced by the reflection sending x to -x, which moves the
    fixed vector and must push at least one probe beyond the threshold.
    """
    if trials < 100:
        raise ValueError(f"need at least 100 trials for stable errors, got {trials}")
    n, depth = cfg.width, cfg.depth
    probe_gen = rng.substream(987).generator
    t_probe = probe_gen.standard_normal((n, n))
    xi = probe_gen.standard_normal(n)

    diffs = np.zeros((trials, depth, len(_PROBE_NAMES)))
    refs = np.zeros((trials, depth, len(_PROBE_NAMES)))
    for t in range(trials):
        state = sample_network(cfg, rng.substream(0, t))
        layer_inputs = (state.input_vector,) + state.activations[:-1]
        for l in range(depth):
            x_prev = layer_inputs[l]
            if break_invariance:
                u_hat = x_prev / np.linalg.norm(x_prev)
                rotation = np.eye(n) - 2.0 * np.outer(u_hat, u_hat)
            else:
                rotation = build_invariance_rotation(
                    x_prev, rng.substream(1, t, l)
                ).fixing_rotation
            w = state.weights[l]
            h = state.preactivations[l]
            modified = _probe_values(w @ rotation, x_prev, h, t_probe, xi)
            reference = _probe_values(w, x_prev, h, t_probe, xi)
            diffs[t, l] = modified - reference
            refs[t, l] = reference

    rows = []
    worst = 0.0
    for l in range(depth):
        for p, name in enumerate(_PROBE_NAMES):
            d = diffs[:, l, p]
            mean = float(np.mean(d))
            se = float(np.std(d, ddof=1) / np.sqrt(trials))
            # Probes that the rotation preserves exactly differ only by
            # roundoff; a relative floor keeps those zero-in-math cases from
            # producing spurious z-scores out of 1e-15-scale systematics.
            floor = 1e-9 * float(np.sqrt(np.mean(refs[:, l, p] ** 2)))
            z = abs(mean) / max(se, floor, 1e-300)
            worst = max(worst, z)
            rows.append({
                "layer": l + 1,
                "probe": name,
                "mean_difference": mean,
                "stderr": se,
                "z": z,
            })
    passed = (worst > z_threshold) if break_invariance else (worst <= z_threshold)
    name = "invariance_negative_control" if break_invariance else "invariance"
    return FreenessReport(
        test_name=name,
        widths=(n,),
        statistics=(worst,),
        standard_errors=(1.0,),
        words=_PROBE_NAMES,
        passed=passed,
        details={"trials": trials, "z_threshold": z_threshold, "probes": rows},
    )


# ---------------------------------------------------------------------------
# cutoff checks
# ---------------------------------------------------------------------------


def cutoff_trace_check(matrices, projection: np.ndarray | None = None
                       ) -> tuple[float, float]:
    """Gap |tr(P X_1 P ... P X_n P) - tr(X_1 ... X_n)| and its bound n C^n / N^(1/n).

    C is the largest Schatten-n norm among the inputs (n = word length) and
    P drops the last coordinate.  The bound is a deterministic inequality;
    a violation beyond roundoff raises ``NumericalError``.
    """
    matrices = [np.asarray(m, dtype=np.float64) for m in matrices]
    if not matrices:
        raise ValueError("need at least one matrix")
    n_word = len(matrices)
    size = matrices[0].shape[0]
    for m in matrices:
        if m.shape != (size, size):
            raise ValueError("all matrices must be square and of equal size")
    if projection is None:
        projection = np.eye(size)
        projection[-1, -1] = 0.0
    big_c = max(schatten_norm(m, n_word) for m in matrices)

    full = matrices[0]
    cut = projection @ matrices[0] @ projection
    for m in matrices[1:]:
        full = full @ m
        cut = cut @ (projection @ m @ projection)
    gap = abs(normalized_trace(cut) - normalized_trace(full))
    bound = n_word * big_c ** n_word / size ** (1.0 / n_word)
    if gap > bound * (1.0 + 1e-9) + 1e-12:
        raise NumericalError(
            f"trace cutoff bound violated: gap {gap:.6e} > bound {bound:.6e}"
        )
    return gap, bound


def cutoff_orthogonal_approx(w: np.ndarray, p: int
                             ) -> tuple[np.ndarray, float, float]:
    """Orthogonal approximation of the compressed corner of an orthogonal matrix.

    Returns (approx, error, bound): approx is the (N-1) x (N-1) orthogonal
    matrix built from the polar part of the corner's SVD, error is the
    corner-normalized Schatten p-norm of the difference, and the bound is
    (N-1)^(-1/p).  Compressing an orthogonal matrix removes at most one unit
    of singular mass, which is what makes the bound deterministic.
    """
    w = np.asarray(w, dtype=np.float64)
    n = w.shape[0]
    if w.shape != (n, n) or n < 2:
        raise ValueError(f"need a square matrix of size >= 2, got shape {w.shape}")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    ortho_defect = np.max(np.abs(w.T @ w - np.eye(n)))
    if ortho_defect > 1e-10 * n:
        raise ValueError(f"input is not orthogonal: defect {ortho_defect:.3e}")
    corner = w[: n - 1, : n - 1]
    u, s, vt = np.linalg.svd(corner)
    approx = u @ vt
    # corner - approx = u (diag(s) - I) vt, so its singular values are |1 - s_i|
    error = float(np.mean(np.abs(1.0 - s) ** p) ** (1.0 / p))
    bound = (n - 1) ** (-1.0 / p)
    if error > bound * (1.0 + 1e-9) + 1e-12:
        raise NumericalError(
            f"orthogonal approximation bound violated: {error:.6e} > {bound:.6e}"
        )
    return approx, error, bound


# ---------------------------------------------------------------------------
# alternating word tests
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WordLetter:
    """One letter of an alternating word: a declared family id, a display
    label, and a builder mapping a sampled network to the letter's matrix."""

    family: str
    label: str
    build: Callable[[NetworkState], np.ndarray]


def letter_weight_symmetrized(layer: int) -> WordLetter:
    """W_l + W_l^T, a non-central element of the layer-l weight family."""
    return WordLetter(
        family=f"weights_{layer}",
        label=f"W{layer}+W{layer}^T",
        build=lambda s: s.weights[layer - 1] + s.weights[layer - 1].T,
    )


def letter_diagonal_power(layer: int, power: int, family: str | None = None) -> WordLetter:
    """diag(d_l)^power from the activation-Jacobian family.

    ``family`` overrides the declared family id; the negative-control suite
    uses that to pass two dependent letters through the alternation check.
    """
    fam = family if family is not None else "diagonals"
    return WordLetter(
        family=fam,
        label=f"D{layer}^{power}",
        build=lambda s: np.diag(s.jacobian_diagonals[layer - 1] ** power),
    )


def letter_rotated_jacobian_gram(layer: int) -> WordLetter:
    """W_{l+1} J_l J_l^T W_{l+1}^T, the rotated input-Jacobian Gram matrix."""

    def build(s: NetworkState) -> np.ndarray:
        jac = input_jacobian_chain(s, layer)
        w_next = s.weights[layer]
        return w_next @ (jac @ jac.T) @ w_next.T

    return WordLetter(
        family=f"rotated_jacobian_gram_{layer}",
        label=f"W{layer + 1}.J{layer}J{layer}^T.W{layer + 1}^T",
        build=build,
    )


def _validate_word(word) -> None:
    if len(word) < 2:
        raise ValueError("an alternating word needs at least two letters")
    for a, b in zip(word, word[1:]):
        if a.family == b.family:
            raise ValueError(
                f"malformed word: adjacent letters {a.label!r} and {b.label!r} "
                f"are declared from the same family {a.family!r}"
            )


def alternating_freeness_test(word, cfg: MlpConfig, widths, trials: int,
                              rng: SeededRng, tolerance: float = 0.02,
                              monotone_se_mult: float = 2.0,
                              expect_vanishing: bool = True) -> FreenessReport:
    """Mean |tr| of the centered alternating word across a width sweep.

    Each letter is centered by subtracting its normalized trace times the
    identity before the product is formed.  Freeness of the letter families
    predicts the statistic vanishes as the width grows; the pass criterion
    is decay (nonincreasing within ``monotone_se_mult`` combined standard
    errors) plus the largest-width mean falling below ``tolerance``.  With
    ``expect_vanishing=False`` (dependent-letters control) the pass
    criterion flips: the largest-width mean must stay above ``tolerance``.
    """
    _validate_word(word)
    widths = [int(n) for n in widths]
    if not widths or widths != sorted(widths):
        raise ValueError(f"width sweep must be nonempty ascending, got {widths}")
    if trials < 2:
        raise ValueError("need at least 2 trials to estimate errors")

    stats, errors = [], []
    for n in widths:
        cfg_n = cfg.with_width(n)
        values = np.empty(trials)
        for t in range(trials):
            state = sample_network(cfg_n, rng.substream(n, t))
            prod = None
            for letter in word:
                m = letter.build(state)
                m = m - normalized_trace(m) * np.eye(n)
                prod = m if prod is None else prod @ m
            values[t] = abs(normalized_trace(prod))
        stats.append(float(np.mean(values)))
        errors.append(float(np.std(values, ddof=1) / np.sqrt(trials)))

    monotone = all(
        stats[i + 1] <= stats[i] + monotone_se_mult * np.hypot(errors[i], errors[i + 1])
        for i in range(len(stats) - 1)
    )
    if expect_vanishing:
        passed = monotone and stats[-1] < tolerance
    else:
        passed = stats[-1] > tolerance
    label = ".".join(l.label for l in word)
    return FreenessReport(
        test_name="alternating_word" if expect_vanishing else "alternating_word_control",
        widths=tuple(widths),
        statistics=tuple(stats),
        standard_errors=tuple(errors),
        words=(label,),
        passed=passed,
        details={
            "trials": trials,
            "tolerance": tolerance,
            "monotone": monotone,
            "expect_vanishing": expect_vanishing,
            "families": [l.family for l in word],
        },
    )


# ---------------------------------------------------------------------------
# moment prediction tests
# ---------------------------------------------------------------------------


def freeness_moment_prediction_test(cfg: MlpConfig, layer: int, target: str,
                                    widths, trials: int, rng: SeededRng,
                                    order: int = 4, rel_tol: float = 0.05,
                                    se_mult: float = 3.0) -> FreenessReport:
    """Empirical spectral moments against the free-convolution prediction.

    ``target`` selects the matrix: "jacobian" for the layer input-Jacobian
    Gram matrix, "fim" for the Fisher recursion matrix of the same index.
    Pass requires every moment k <= order at the largest width to satisfy
    |empirical - theory| <= max(rel_tol |theory|, se_mult SE).
    """
    if target == "jacobian":
        theory = predict_jacobian_moments(cfg, layer, order=max(order, 4))
    elif target == "fim":
        theory = predict_fim_moments(cfg, layer, order=max(order, 4))
    else:
        raise ValueError(f"target must be 'jacobian' or 'fim', got {target!r}")
    widths = [int(n) for n in widths]
    if not widths or widths != sorted(widths):
        raise ValueError(f"width sweep must be nonempty ascending, got {widths}")

    rows = []
    stats, errors = [], []
    for n in widths:
        cfg_n = cfg.with_width(n)
        samples = np.empty((trials, order))
        for t in range(trials):
            state = sample_network(cfg_n, rng.substream(n, t))
            if target == "jacobian":
                jac = input_jacobian_chain(state, layer)
                matrix = jac @ jac.T
            else:
                matrix = fim_recursion(state)[layer - 1]
            samples[t] = empirical_moments(spectrum_of(matrix), order).moments
        means = samples.mean(axis=0)
        ses = samples.std(axis=0, ddof=1) / np.sqrt(trials)
        worst_rel, worst_se = 0.0, 0.0
        for k in range(order):
            th = theory.moment(k + 1)
            gap = abs(means[k] - th)
            ok = gap <= max(rel_tol * abs(th), se_mult * ses[k])
            rows.append({
                "width": n,
                "moment_order": k + 1,
                "empirical": float(means[k]),
                "stderr": float(ses[k]),
                "theory": th,
                "rel_err": float(gap / abs(th)) if th != 0 else float("inf"),
                "within_tolerance": bool(ok),
            })
            worst_rel = max(worst_rel, gap / abs(th) if th != 0 else np.inf)
            worst_se = max(worst_se, float(ses[k] / abs(th)) if th != 0 else 0.0)
        stats.append(float(worst_rel))
        errors.append(float(worst_se))

    final_rows = [r for r in rows if r["width"] == widths[-1]]
    passed = all(r["within_tolerance"] for r in final_rows)
    return FreenessReport(
        test_name=f"moment_prediction_{target}",
        widths=tuple(widths),
        statistics=tuple(stats),
        standard_errors=tuple(errors),
        words=(f"{target}_layer_{layer}_moments_1..{order}",),
        passed=passed,
        details={
            "layer": layer,
            "order": order,
            "rel_tol": rel_tol,
            "se_mult": se_mult,
            "trials": trials,
            "moments": rows,
        },
    )
