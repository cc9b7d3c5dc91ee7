"""Empirical spectra: eigenvalue lists, moments, histograms, KS distances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr as _ndtr

from .linalg import symmetric_eigen
from .series import MomentSeries

__all__ = [
    "EmpiricalSpectrum",
    "Histogram",
    "spectrum_of",
    "empirical_moments",
    "ks_distance_to_gaussian",
    "histogram",
]


@dataclass(frozen=True)
class EmpiricalSpectrum:
    """Sorted eigenvalues of one symmetric matrix of size ``source_size``."""

    eigenvalues: np.ndarray
    source_size: int

    def __post_init__(self):
        if self.eigenvalues.size != self.source_size:
            raise ValueError("eigenvalue count must equal the source size")


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def spectrum_of(a: np.ndarray) -> EmpiricalSpectrum:
    """Empirical spectral distribution (as sorted eigenvalues) of a symmetric matrix."""
    result = symmetric_eigen(a)
    return EmpiricalSpectrum(eigenvalues=result.eigenvalues, source_size=result.eigenvalues.size)


def empirical_moments(spectrum: EmpiricalSpectrum, max_order: int) -> MomentSeries:
    """m_k = N^-1 sum lambda_i^k for k = 1..max_order."""
    if max_order < 1:
        raise ValueError(f"max_order must be >= 1, got {max_order}")
    lam = spectrum.eigenvalues
    moments = np.array([float(np.mean(lam ** k)) for k in range(1, max_order + 1)])
    return MomentSeries(moments)


def ks_distance_to_gaussian(samples, mean: float, variance: float) -> float:
    """Two-sided sup distance between the empirical CDF and N(mean, variance).

    Uses the exact formula: the maximum over sorted sample points of both
    one-sided gaps between the step CDF and the Gaussian CDF.
    """
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance}")
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n == 0:
        raise ValueError("samples must be nonempty")
    cdf = _ndtr((x - mean) / np.sqrt(variance))
    steps_lo = np.arange(n) / n
    steps_hi = np.arange(1, n + 1) / n
    return float(max(np.max(cdf - steps_lo), np.max(steps_hi - cdf)))


def histogram(spectrum: EmpiricalSpectrum, bins: int) -> Histogram:
    """Equal-width bins spanning [min, max]; values on an interior edge go
    to the upper bin, the maximum goes to the last bin."""
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    counts, edges = np.histogram(spectrum.eigenvalues, bins=bins)
    return Histogram(bin_edges=edges, counts=counts)
