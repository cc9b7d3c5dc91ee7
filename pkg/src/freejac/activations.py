"""Activation catalog with derivatives and Gaussian-expectation quadrature.

Seven activation kinds are supported: relu, shifted_relu (with a shift
parameter), hard_tanh, tanh, sigmoid, silu, erf.  Each carries a vectorized
closed-form evaluation and derivative.  At kink points the derivative
returns the right-limit; the choice is immaterial for any Gaussian
expectation because the kinks form a null set.

Gaussian expectations use a Gauss-Hermite rule normalized for N(0,1).  For
the squared-derivative moments of the kinked activations (whose derivative
is piecewise constant) the quadrature would converge slowly across the
jump, so those moments are instead computed exactly from normal-CDF
interval masses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import erf as _erf, expit as _expit, ndtr as _ndtr, roots_hermitenorm

from .series import MomentSeries

__all__ = [
    "Activation",
    "GaussHermiteRule",
    "ACTIVATION_KINDS",
    "make_activation",
    "gaussian_expectation",
    "derivative_square_moments",
]

DEFAULT_QUADRATURE_ORDER = 201


@dataclass(frozen=True)
class Activation:
    """An entrywise nonlinearity with bounded derivative.

    ``piecewise_deriv`` is set when the derivative is a step function:
    ``(breakpoints, values)`` with len(values) = len(breakpoints) + 1, the
    value on each open interval between consecutive breakpoints.
    """

    kind: str
    eval_fn: Callable[[np.ndarray], np.ndarray]
    deriv_fn: Callable[[np.ndarray], np.ndarray]
    deriv_bound: float
    shift: float | None = None
    piecewise_deriv: tuple[tuple[float, ...], tuple[float, ...]] | None = field(
        default=None, repr=False
    )

    def eval(self, x):
        return self.eval_fn(np.asarray(x, dtype=np.float64))

    def deriv(self, x):
        return self.deriv_fn(np.asarray(x, dtype=np.float64))

    @property
    def name(self) -> str:
        if self.kind == "shifted_relu":
            return f"shifted_relu({self.shift})"
        return self.kind


def _relu() -> Activation:
    return Activation(
        kind="relu",
        eval_fn=lambda x: np.maximum(x, 0.0),
        deriv_fn=lambda x: np.where(x >= 0.0, 1.0, 0.0),
        deriv_bound=1.0,
        piecewise_deriv=((0.0,), (0.0, 1.0)),
    )


def _shifted_relu(shift: float) -> Activation:
    a = float(shift)
    return Activation(
        kind="shifted_relu",
        eval_fn=lambda x: np.where(x >= a, x, a),
        deriv_fn=lambda x: np.where(x >= a, 1.0, 0.0),
        deriv_bound=1.0,
        shift=a,
        piecewise_deriv=((a,), (0.0, 1.0)),
    )


def _hard_tanh() -> Activation:
    return Activation(
        kind="hard_tanh",
        eval_fn=lambda x: np.clip(x, -1.0, 1.0),
        deriv_fn=lambda x: np.where((x >= -1.0) & (x < 1.0), 1.0, 0.0),
        deriv_bound=1.0,
        piecewise_deriv=((-1.0, 1.0), (0.0, 1.0, 0.0)),
    )


def _tanh() -> Activation:
    return Activation(
        kind="tanh",
        eval_fn=np.tanh,
        deriv_fn=lambda x: 1.0 - np.tanh(x) ** 2,
        deriv_bound=1.0,
    )


def _sigmoid() -> Activation:
    def deriv(x):
        s = _expit(x)
        return s * (1.0 - s)

    return Activation(
        kind="sigmoid", eval_fn=_expit, deriv_fn=deriv, deriv_bound=0.25
    )


def _silu() -> Activation:
    def value(x):
        return x * _expit(x)

    def deriv(x):
        s = _expit(x)
        return s * (1.0 + x * (1.0 - s))

    # sup |silu'| is attained near x ~ 2.4, slightly above 1.
    return Activation(kind="silu", eval_fn=value, deriv_fn=deriv, deriv_bound=1.1)


def _erf_activation() -> Activation:
    c = 2.0 / math.sqrt(math.pi)
    return Activation(
        kind="erf",
        eval_fn=_erf,
        deriv_fn=lambda x: c * np.exp(-np.square(x)),
        deriv_bound=c,
    )


_FACTORIES: dict[str, Callable[..., Activation]] = {
    "relu": _relu,
    "shifted_relu": _shifted_relu,
    "hard_tanh": _hard_tanh,
    "tanh": _tanh,
    "sigmoid": _sigmoid,
    "silu": _silu,
    "erf": _erf_activation,
}

ACTIVATION_KINDS = tuple(_FACTORIES)


def make_activation(kind: str, shift: float = 0.5) -> Activation:
    """Build a catalog activation by its lowercase identifier.

    ``shift`` only applies to shifted_relu and defaults to 0.5.
    """
    if kind not in _FACTORIES:
        raise ValueError(f"unknown activation kind {kind!r}; choose from {ACTIVATION_KINDS}")
    if kind == "shifted_relu":
        return _FACTORIES[kind](shift)
    return _FACTORIES[kind]()


@dataclass(frozen=True)
class GaussHermiteRule:
    """Quadrature nodes/weights normalized so that sum w_i f(x_i) ~ E[f(Z)], Z ~ N(0,1)."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def order(self) -> int:
        return self.nodes.size

    @classmethod
    def of_order(cls, order: int = DEFAULT_QUADRATURE_ORDER) -> "GaussHermiteRule":
        if order < 1:
            raise ValueError(f"order must be >= 1, got {order}")
        nodes, weights = roots_hermitenorm(order)
        return cls(nodes=nodes, weights=weights / math.sqrt(2.0 * math.pi))


def gaussian_expectation(f: Callable[[np.ndarray], np.ndarray], q: float,
                         rule: GaussHermiteRule) -> float:
    """E[f(h)] for h ~ N(0, q), evaluated as sum w_i f(sqrt(q) x_i)."""
    if not q > 0:
        raise ValueError(f"variance q must be positive, got {q}")
    return float(np.dot(rule.weights, f(math.sqrt(q) * rule.nodes)))


def derivative_square_moments(activation: Activation, q: float, max_order: int,
                              rule: GaussHermiteRule) -> MomentSeries:
    """Moments m_k = E[(phi'(h))^(2k)], h ~ N(0, q), for k = 1..max_order.

    These are the moments of the squared-derivative distribution that the
    diagonal Jacobian of a wide layer converges to.  Piecewise-constant
    derivatives are integrated exactly through normal interval masses; the
    smooth catalog members go through the quadrature rule.
    """
    if not q > 0:
        raise ValueError(f"variance q must be positive, got {q}")
    if max_order < 1:
        raise ValueError(f"max_order must be >= 1, got {max_order}")
    ks = np.arange(1, max_order + 1)
    if activation.piecewise_deriv is not None:
        breaks, values = activation.piecewise_deriv
        std = math.sqrt(q)
        edges = np.concatenate(([-np.inf], np.asarray(breaks) / std, [np.inf]))
        cdf = _ndtr(edges)
        masses = np.diff(cdf)
        vals = np.asarray(values, dtype=np.float64)
        moments = np.array([float(np.sum(masses * vals ** (2 * k))) for k in ks])
    else:
        dsq = activation.deriv(math.sqrt(q) * rule.nodes) ** 2
        moments = np.array([float(np.dot(rule.weights, dsq ** k)) for k in ks])
    return MomentSeries(moments)
