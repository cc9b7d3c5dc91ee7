"""Truncated formal power series and moment sequences.

A ``PowerSeries`` keeps coefficients c_1..c_K of sum_{n>=1} c_n z^n, with no
constant term, which is the natural house for moment generating series
M(z) = sum tr(a^n) z^n of a bounded element.  ``MomentSeries`` is the same
data interpreted as the moments m_1..m_K of a compactly supported measure.
The S-transform S(z) = ((1+z)/z) * M^{<-1>}(z) does carry a constant term,
so it gets its own container with coefficients s_0..s_{K-1}.

All arithmetic is plain float64 vectors truncated at order K; identical
inputs produce bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PowerSeries",
    "MomentSeries",
    "STransform",
    "series_compose",
    "series_reversion",
    "s_transform",
    "moments_from_s",
    "free_multiplicative_convolution",
    "affine_pushforward",
    "dilate",
]


def _coeff_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).copy()
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a nonempty 1-d coefficient vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite coefficients")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PowerSeries:
    """Coefficients c_1..c_K of a series with no constant term."""

    coefficients: np.ndarray

    def __init__(self, coefficients):
        object.__setattr__(self, "coefficients", _coeff_array(coefficients, "coefficients"))

    @property
    def order(self) -> int:
        return self.coefficients.size

    def __getitem__(self, n: int) -> float:
        """Coefficient of z^n, n = 1..K."""
        if not 1 <= n <= self.order:
            raise IndexError(f"coefficient index {n} outside 1..{self.order}")
        return float(self.coefficients[n - 1])


@dataclass(frozen=True)
class MomentSeries:
    """Moments m_1..m_K of a (presumed compactly supported) measure."""

    moments: np.ndarray

    def __init__(self, moments):
        object.__setattr__(self, "moments", _coeff_array(moments, "moments"))

    @property
    def order(self) -> int:
        return self.moments.size

    def moment(self, k: int) -> float:
        if not 1 <= k <= self.order:
            raise IndexError(f"moment index {k} outside 1..{self.order}")
        return float(self.moments[k - 1])

    def as_power_series(self) -> PowerSeries:
        return PowerSeries(self.moments)

    def hankel_defect(self) -> float:
        """det [[1, m1], [m1, m2]]; positive measures keep this >= -1e-9."""
        m = self.moments
        if m.size < 2:
            return 0.0
        return float(m[1] - m[0] * m[0])


@dataclass(frozen=True)
class STransform:
    """Coefficients s_0..s_{K-1} of the S-transform expanded about z = 0."""

    coefficients: np.ndarray

    def __init__(self, coefficients):
        object.__setattr__(self, "coefficients", _coeff_array(coefficients, "coefficients"))

    @property
    def order(self) -> int:
        return self.coefficients.size

    @property
    def constant_term(self) -> float:
        return float(self.coefficients[0])


def _mul_trunc(a: np.ndarray, b: np.ndarray, k: int) -> np.ndarray:
    """Product of two no-constant-term coefficient vectors, truncated at order k."""
    out = np.convolve(a, b)[: 2 * k]
    # a, b index from z^1, so the product indexes from z^2: shift by one slot.
    res = np.zeros(k)
    top = min(k - 1, out.size)
    res[1 : top + 1] = out[:top]
    return res


def series_compose(p: PowerSeries, q: PowerSeries) -> PowerSeries:
    """p(q(z)) truncated at the smaller of the two orders."""
    k = min(p.order, q.order)
    pc = p.coefficients[:k]
    qc = q.coefficients[:k]
    power = qc.copy()  # q(z)^j, truncated
    acc = pc[0] * power
    for j in range(2, k + 1):
        power = _mul_trunc(power, qc, k)
        acc = acc + pc[j - 1] * power
    return PowerSeries(acc)


def series_reversion(p: PowerSeries) -> PowerSeries:
    """Compositional inverse q with p(q(z)) = z through order K.

    Solves the triangular system coefficient by coefficient: the z^k term of
    p(q) involves q_k only through the linear term c_1 q_k, so each step is a
    single division by c_1.
    """
    c = p.coefficients
    k_max = p.order
    if c[0] == 0.0:
        raise ValueError("series with zero linear coefficient has no reversion")
    q = np.zeros(k_max)
    q[0] = 1.0 / c[0]
    for k in range(2, k_max + 1):
        # Coefficient of z^k in p(q) with the current partial q (q_k still 0).
        power = q[:k].copy()
        total = c[0] * power[k - 1]
        for j in range(2, k + 1):
            power = _mul_trunc(power, q[:k], k)
            total += c[j - 1] * power[k - 1]
        q[k - 1] = -total / c[0]
    return PowerSeries(q)


def s_transform(m: MomentSeries) -> STransform:
    """S(z) = ((1+z)/z) * M^{<-1>}(z), defined only when m_1 != 0."""
    if m.moment(1) == 0.0:
        raise ValueError(
            "S-transform undefined: first moment is zero (the transform "
            "requires a nonvanishing mean)"
        )
    inv = series_reversion(m.as_power_series()).coefficients
    k = inv.size
    s = np.empty(k)
    s[0] = inv[0]
    s[1:] = inv[1:] + inv[:-1]
    return STransform(s)


def moments_from_s(s: STransform) -> MomentSeries:
    """Invert the S-transform back to moments.

    Reconstructs M^{<-1>}(z) = (z/(1+z)) S(z) coefficientwise, then reverts.
    """
    if s.constant_term == 0.0:
        raise ValueError("S-transform with zero constant term cannot be inverted")
    sc = s.coefficients
    k = sc.size
    # z*S(z) has coefficients s_{j-1} at z^j; divide by (1+z) via the
    # recurrence a_j = s_{j-1} - a_{j-1}.
    inv = np.empty(k)
    inv[0] = sc[0]
    for j in range(1, k):
        inv[j] = sc[j] - inv[j - 1]
    return MomentSeries(series_reversion(PowerSeries(inv)).coefficients)


def free_multiplicative_convolution(mu: MomentSeries, nu: MomentSeries) -> MomentSeries:
    """Moments of mu boxtimes nu via the S-transform product."""
    k = min(mu.order, nu.order)
    s_mu = s_transform(MomentSeries(mu.moments[:k]))
    s_nu = s_transform(MomentSeries(nu.moments[:k]))
    prod = np.convolve(s_mu.coefficients, s_nu.coefficients)[:k]
    return moments_from_s(STransform(prod))


def affine_pushforward(m: MomentSeries, shift: float, scale: float) -> MomentSeries:
    """Moments of shift + scale * X by binomial expansion (m_0 = 1)."""
    k = m.order
    full = np.concatenate(([1.0], m.moments))
    out = np.empty(k)
    for order in range(1, k + 1):
        j = np.arange(order + 1)
        binom = np.array([_binomial(order, int(i)) for i in j])
        out[order - 1] = float(
            np.sum(binom * (shift ** (order - j)) * (scale ** j) * full[: order + 1])
        )
    return MomentSeries(out)


def dilate(m: MomentSeries, scale: float) -> MomentSeries:
    """Moments of scale * X: m_k -> scale^k m_k."""
    k = np.arange(1, m.order + 1)
    return MomentSeries(m.moments * scale ** k)


def _binomial(n: int, k: int) -> float:
    from math import comb

    return float(comb(n, k))
