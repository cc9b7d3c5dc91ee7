"""Haar-orthogonal multilayer perceptron simulation.

A network is L square layers of width N: preactivation h_l = W_l x_{l-1},
activation x_l = phi_l(h_l) entrywise, weights W_l = sigma_l * (Haar
orthogonal), no biases.  ``sample_network`` draws one realization and
records everything downstream analyses need: the diagonal of each layer's
activation Jacobian, and the empirical mean squares ||x_l||^2 / N.

The input is drawn on the sphere of radius r*sqrt(N) by default, so the
normalized input norm equals r exactly at every width.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .activations import (
    Activation,
    GaussHermiteRule,
    gaussian_expectation,
    make_activation,
)
from .linalg import sample_haar_orthogonal
from .rng import SeededRng

__all__ = [
    "MlpConfig",
    "NetworkState",
    "TheoryProfile",
    "sample_network",
    "forward_pass",
    "sample_preactivations",
    "theory_profile",
    "input_jacobian_chain",
    "backward_chains",
    "fim_recursion",
    "fim_dual_matrix",
    "parameter_jacobian_oracle",
]

INPUT_MODES = ("unit_sphere_scaled", "fixed_vector")


@dataclass(frozen=True)
class MlpConfig:
    """Architecture plus initialization scales.

    ``sigma_w`` and ``activation`` may be given as a single value applied to
    every layer or as per-layer sequences of length ``depth``.
    """

    depth: int
    width: int
    sigma_w: tuple[float, ...]
    activations: tuple[Activation, ...]
    input_radius: float = 1.0
    input_mode: str = "unit_sphere_scaled"
    quadrature_order: int = 201

    def __init__(self, depth, width, sigma_w, activation, input_radius=1.0,
                 input_mode="unit_sphere_scaled", quadrature_order=201):
        depth = int(depth)
        width = int(width)
        if depth < 1:
            raise ValueError(f"depth must be >= 1, got {depth}")
        if width < 2:
            raise ValueError(f"width must be >= 2, got {width}")
        sigmas = _per_layer(sigma_w, depth, "sigma_w")
        sigmas = tuple(float(s) for s in sigmas)
        if any(s <= 0 for s in sigmas):
            raise ValueError(f"all sigma_w must be positive, got {sigmas}")
        acts = _per_layer(activation, depth, "activation")
        acts = tuple(a if isinstance(a, Activation) else make_activation(a) for a in acts)
        if not float(input_radius) > 0:
            raise ValueError(f"input_radius must be positive, got {input_radius}")
        if input_mode not in INPUT_MODES:
            raise ValueError(f"input_mode must be one of {INPUT_MODES}, got {input_mode!r}")
        if int(quadrature_order) < 1:
            raise ValueError(f"quadrature_order must be >= 1, got {quadrature_order}")
        object.__setattr__(self, "depth", depth)
        object.__setattr__(self, "width", width)
        object.__setattr__(self, "sigma_w", sigmas)
        object.__setattr__(self, "activations", acts)
        object.__setattr__(self, "input_radius", float(input_radius))
        object.__setattr__(self, "input_mode", input_mode)
        object.__setattr__(self, "quadrature_order", int(quadrature_order))

    def with_width(self, width: int) -> "MlpConfig":
        return MlpConfig(
            depth=self.depth,
            width=width,
            sigma_w=self.sigma_w,
            activation=self.activations,
            input_radius=self.input_radius,
            input_mode=self.input_mode,
            quadrature_order=self.quadrature_order,
        )


def _per_layer(value, depth: int, name: str):
    if isinstance(value, (list, tuple)):
        if len(value) != depth:
            raise ValueError(f"{name} has {len(value)} entries for depth {depth}")
        return tuple(value)
    return (value,) * depth


@dataclass(frozen=True)
class NetworkState:
    """One sampled realization with its forward pass.

    ``jacobian_diagonals[l]`` holds the diagonal entries of the activation
    Jacobian of layer l+1, and ``mean_square_activations[l]`` is
    ||x_l||^2 / N with index 0 for the input (exactly r^2 in sphere mode).
    """

    config: MlpConfig
    input_vector: np.ndarray
    weights: tuple[np.ndarray, ...]
    preactivations: tuple[np.ndarray, ...]
    activations: tuple[np.ndarray, ...]
    jacobian_diagonals: tuple[np.ndarray, ...]
    mean_square_activations: tuple[float, ...] = field(repr=False)

    @property
    def width(self) -> int:
        return self.config.width

    @property
    def depth(self) -> int:
        return self.config.depth


def _sample_input(cfg: MlpConfig, rng: SeededRng) -> np.ndarray:
    n = cfg.width
    target = cfg.input_radius * np.sqrt(n)
    if cfg.input_mode == "fixed_vector":
        return np.full(n, cfg.input_radius)
    g = rng.generator.standard_normal(n)
    norm = np.linalg.norm(g)
    while norm == 0.0:  # probability-zero guard
        g = rng.generator.standard_normal(n)
        norm = np.linalg.norm(g)
    return g * (target / norm)


def forward_pass(weights, activations, x0):
    """Propagate x0 through given weights; returns (h list, x list, d list)."""
    pre, post, diags = [], [], []
    x = np.asarray(x0, dtype=np.float64)
    for w, act in zip(weights, activations):
        h = w @ x
        x = act.eval(h)
        pre.append(h)
        post.append(x)
        diags.append(act.deriv(h))
    return pre, post, diags


def sample_network(cfg: MlpConfig, rng: SeededRng) -> NetworkState:
    """Draw input and weights on disjoint substreams and run the forward pass."""
    x0 = _sample_input(cfg, rng.substream(0))
    weights = tuple(
        cfg.sigma_w[l] * sample_haar_orthogonal(rng.substream(l + 1), cfg.width)
        for l in range(cfg.depth)
    )
    pre, post, diags = forward_pass(weights, cfg.activations, x0)
    n = cfg.width
    msq = [float(np.dot(x0, x0) / n)]
    msq.extend(float(np.dot(x, x) / n) for x in post)
    return NetworkState(
        config=cfg,
        input_vector=x0,
        weights=weights,
        preactivations=tuple(pre),
        activations=tuple(post),
        jacobian_diagonals=tuple(diags),
        mean_square_activations=tuple(msq),
    )


def sample_preactivations(cfg: MlpConfig, rng: SeededRng) -> list[np.ndarray]:
    """Preactivation vectors h_1..h_L drawn from the exact network law
    without forming any weight matrix.

    An independent Haar orthogonal matrix applied to a fixed vector is a
    uniformly random vector of the same norm, so conditionally on x_{l-1}
    the preactivation h_l = W_l x_{l-1} is sigma_l * ||x_{l-1}|| times an
    independent uniform unit vector.  Sampling that chain directly costs
    O(N) per layer instead of O(N^3) and has the same joint distribution as
    the full forward pass.
    """
    x = _sample_input(cfg, rng.substream(0))
    out = []
    for l in range(cfg.depth):
        g = rng.substream(l + 1).generator.standard_normal(cfg.width)
        g *= 1.0 / np.linalg.norm(g)
        h = cfg.sigma_w[l] * np.linalg.norm(x) * g
        out.append(h)
        x = cfg.activations[l].eval(h)
    return out


def theory_profile(cfg: MlpConfig) -> "TheoryProfile":
    """Wide-limit recursion for preactivation variances and activation RMS.

    q_l = sigma_l^2 r_{l-1}^2 and r_l^2 = E[phi_l(h)^2] with h ~ N(0, q_l),
    seeded by r_0 = input_radius.
    """
    rule = GaussHermiteRule.of_order(cfg.quadrature_order)
    r = [cfg.input_radius]
    q = []
    for l in range(cfg.depth):
        q_l = cfg.sigma_w[l] ** 2 * r[-1] ** 2
        act = cfg.activations[l]
        second = gaussian_expectation(lambda h: act.eval(h) ** 2, q_l, rule)
        q.append(q_l)
        r.append(float(np.sqrt(second)))
    return TheoryProfile(preact_variances=tuple(q), activation_rms=tuple(r))


@dataclass(frozen=True)
class TheoryProfile:
    """q_1..q_L and r_0..r_L from the wide-limit recursion."""

    preact_variances: tuple[float, ...]
    activation_rms: tuple[float, ...]


def input_jacobian_chain(state: NetworkState, layer: int) -> np.ndarray:
    """Jacobian of x_layer with respect to the input: D_l W_l ... D_1 W_1.

    Accumulates right to left; diagonal factors are applied as row scalings
    so no dense diagonal matrix is ever formed.
    """
    _check_layer(state, layer)
    jac = None
    for l in range(layer):
        jac = state.weights[l] if jac is None else state.weights[l] @ jac
        jac = state.jacobian_diagonals[l][:, None] * jac
    return jac


def backward_chains(state: NetworkState) -> list[np.ndarray]:
    """Backward hidden-to-hidden Jacobians d h_L / d h_l for l = 1..L.

    The last entry is the identity; earlier entries follow from composing
    one layer at a time: d h_L / d h_l = (d h_L / d h_{l+1}) W_{l+1} D_l.
    """
    n, depth = state.width, state.depth
    chains: list[np.ndarray] = [np.eye(n)]
    for l in range(depth - 1, 0, -1):
        step = state.weights[l] * state.jacobian_diagonals[l - 1][None, :]
        chains.append(chains[-1] @ step)
    chains.reverse()
    return chains


def fim_recursion(state: NetworkState) -> list[np.ndarray]:
    """Matrices H_1..H_L with H_1 = I and
    H_{l+1} = qhat_l I + W_{l+1} D_l H_l D_l W_{l+1}^T.

    Their spectra track the nonzero part of the per-sample Fisher
    information; see ``parameter_jacobian_oracle`` for the dense cross-check.
    """
    n = state.width
    msq = state.mean_square_activations
    out = [np.eye(n)]
    for l in range(1, state.depth):
        d = state.jacobian_diagonals[l - 1]
        inner = d[:, None] * out[-1] * d[None, :]
        w = state.weights[l]
        out.append(msq[l] * np.eye(n) + w @ inner @ w.T)
    return out


def fim_dual_matrix(state: NetworkState) -> np.ndarray:
    """D_L H_L D_L, the width-sized dual of the per-sample Fisher matrix."""
    h_last = fim_recursion(state)[-1]
    d = state.jacobian_diagonals[-1]
    return d[:, None] * h_last * d[None, :]


PARAMETER_ORACLE_MAX_WIDTH = 128


def parameter_jacobian_oracle(state: NetworkState) -> np.ndarray:
    """Dense Jacobian of the network output with respect to every weight entry.

    Returns the N x (L N^2) matrix whose block l has one column per weight
    entry (i, j) of layer l, equal to x_{l-1}[j] times column i of
    D_L (d h_L / d h_l).  Meant purely as a brute-force test oracle; widths
    above 128 are rejected to keep the dense block affordable.
    """
    n = state.width
    if n > PARAMETER_ORACLE_MAX_WIDTH:
        raise ValueError(
            f"width {n} exceeds the dense oracle envelope "
            f"{PARAMETER_ORACLE_MAX_WIDTH}"
        )
    chains = backward_chains(state)
    d_last = state.jacobian_diagonals[-1]
    inputs = (state.input_vector,) + state.activations[:-1]
    blocks = []
    for l in range(state.depth):
        front = d_last[:, None] * chains[l]
        blocks.append(np.kron(front, inputs[l][None, :]))
    return np.hstack(blocks)


def _check_layer(state: NetworkState, layer: int) -> None:
    if not 1 <= layer <= state.depth:
        raise ValueError(f"layer must be in 1..{state.depth}, got {layer}")
