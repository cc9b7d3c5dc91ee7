"""Free multiplicative convolution engine and wide-limit spectrum predictors.

The S-transform of a moment sequence, its inverse, and the convolution
``mu boxtimes nu`` live in :mod:`freejac.series`; this module combines them
with the network theory profile to predict the limiting spectra of the
input-Jacobian Gram matrices and of the Fisher-information recursion
matrices.

Both predictors follow the same recipe: the squared-derivative distribution
of each layer enters through its moments, weight scales enter as measure
dilations (scaling a measure by c divides its S-transform by c, so dilating
before convolving is the same as multiplying the transform product by the
inverse scale, while keeping every intermediate object a genuine measure).
"""

from __future__ import annotations

import numpy as np

from .activations import GaussHermiteRule, derivative_square_moments
from .mlp import MlpConfig, theory_profile
from .series import (
    MomentSeries,
    PowerSeries,
    STransform,
    affine_pushforward,
    dilate,
    free_multiplicative_convolution,
    moments_from_s,
    s_transform,
    series_compose,
    series_reversion,
)

__all__ = [
    "MomentSeries",
    "PowerSeries",
    "STransform",
    "series_compose",
    "series_reversion",
    "s_transform",
    "moments_from_s",
    "free_multiplicative_convolution",
    "affine_pushforward",
    "dilate",
    "layer_derivative_moments",
    "predict_jacobian_moments",
    "predict_fim_moments",
]

DEFAULT_ORDER = 12


def layer_derivative_moments(cfg: MlpConfig, order: int = DEFAULT_ORDER) -> list[MomentSeries]:
    """Squared-derivative moment series of each layer at its theory variance."""
    profile = theory_profile(cfg)
    rule = GaussHermiteRule.of_order(cfg.quadrature_order)
    return [
        derivative_square_moments(cfg.activations[l], profile.preact_variances[l], order, rule)
        for l in range(cfg.depth)
    ]


def _require_nonzero_mean(m: MomentSeries, layer: int) -> None:
    if m.moment(1) == 0.0:
        raise ValueError(
            f"layer {layer} squared-derivative distribution has zero mean; "
            "the S-transform pipeline needs a nonvanishing first moment "
            "(e.g. a relu layer whose preactivations are almost surely negative)"
        )


def predict_jacobian_moments(cfg: MlpConfig, layer: int,
                             order: int = DEFAULT_ORDER) -> MomentSeries:
    """Limit spectral moments of J_l J_l^T, the layer-l input-Jacobian Gram matrix.

    The limit measure is the free multiplicative convolution of the per-layer
    squared-derivative distributions, each dilated by its weight variance.
    """
    _check_layer(cfg, layer)
    derivative_moments = layer_derivative_moments(cfg, order)
    result: MomentSeries | None = None
    for l in range(layer):
        nu = derivative_moments[l]
        _require_nonzero_mean(nu, l + 1)
        scaled = dilate(nu, cfg.sigma_w[l] ** 2)
        result = scaled if result is None else free_multiplicative_convolution(result, scaled)
    return result


def predict_fim_moments(cfg: MlpConfig, layer: int,
                        order: int = DEFAULT_ORDER) -> MomentSeries:
    """Limit spectral moments of the layer-l Fisher-information recursion matrix.

    Starts from the point mass at 1 (the recursion's identity base case) and
    alternates free multiplicative convolution with the squared-derivative
    distribution and an affine pushforward: shift by the limiting activation
    mean square r_l^2 (the wide limit of ||x_l||^2 / N appearing in the
    recursion) and scale by the next layer's weight variance.
    """
    _check_layer(cfg, layer)
    profile = theory_profile(cfg)
    derivative_moments = layer_derivative_moments(cfg, order)
    result = MomentSeries(np.ones(order))  # point mass at 1
    for l in range(1, layer):
        nu = derivative_moments[l - 1]
        _require_nonzero_mean(nu, l)
        mixed = free_multiplicative_convolution(result, nu)
        result = affine_pushforward(
            mixed, shift=profile.activation_rms[l] ** 2, scale=cfg.sigma_w[l] ** 2
        )
    return result


def _check_layer(cfg: MlpConfig, layer: int) -> None:
    if not 1 <= layer <= cfg.depth:
        raise ValueError(f"layer must be in 1..{cfg.depth}, got {layer}")
