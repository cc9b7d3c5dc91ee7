"""Random matrix sampling and dense linear-algebra kernels.

Matrices are plain two-dimensional float64 C-contiguous numpy arrays.  All
samplers are pure functions of the ``SeededRng`` state and the requested
shape; all residual tolerances scale with the matrix size and magnitude,
never fixed absolute numbers.  The design envelope is dense N <= 2048.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import SeededRng

__all__ = [
    "NumericalError",
    "SymmetricEigenResult",
    "sample_gaussian_matrix",
    "sample_haar_orthogonal",
    "symmetric_eigen",
    "svd",
    "schatten_norm",
    "normalized_trace",
]


class NumericalError(RuntimeError):
    """An iterative kernel (eigensolver, SVD) failed to converge."""


@dataclass(frozen=True)
class SymmetricEigenResult:
    """Eigenvalues in ascending order with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def residual(self, a: np.ndarray) -> float:
        """Max-abs entry of A V - V diag(lambda)."""
        return float(
            np.max(np.abs(a @ self.eigenvectors - self.eigenvectors * self.eigenvalues))
        )


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {a.shape}")
    return a


def _require_square(a: np.ndarray) -> int:
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a.shape[0]


def sample_gaussian_matrix(rng: SeededRng, n: int, m: int, std: float) -> np.ndarray:
    """n x m matrix of i.i.d. centered Gaussians with standard deviation ``std``."""
    if n < 1 or m < 1:
        raise ValueError(f"matrix shape must be at least 1x1, got {n}x{m}")
    if not std > 0:
        raise ValueError(f"std must be positive, got {std}")
    return std * rng.generator.standard_normal((n, m))


def sample_haar_orthogonal(rng: SeededRng, n: int) -> np.ndarray:
    """Haar-distributed orthogonal n x n matrix.

    QR-factorizes a Gaussian matrix and flips each column by the sign of the
    corresponding R diagonal entry.  The sign correction makes the output
    exactly Haar rather than merely orthogonal: without it the QR convention
    biases the distribution.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    g = rng.generator.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    d = np.sign(np.diag(r))
    d[d == 0.0] = 1.0
    return q * d


def symmetric_eigen(a) -> SymmetricEigenResult:
    """Full eigendecomposition of a symmetric matrix, eigenvalues ascending.

    Rejects inputs that are not symmetric to 1e-10 relative to their largest
    entry.  Non-convergence of the underlying solver is reported as
    ``NumericalError``.
    """
    a = _as_matrix(a)
    _require_square(a)
    scale = max(np.max(np.abs(a)), 1e-300)
    asym = np.max(np.abs(a - a.T))
    if asym > 1e-10 * scale:
        raise ValueError(
            f"matrix is not symmetric: max |A - A^T| = {asym:.3e} "
            f"exceeds 1e-10 * maxabs = {1e-10 * scale:.3e}"
        )
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigensolver did not converge: {exc}") from exc
    return SymmetricEigenResult(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def svd(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Singular value decomposition a = U diag(s) V^T with s descending."""
    a = _as_matrix(a)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    try:
        u, s, vt = np.linalg.svd(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    return u, s, vt.T


def schatten_norm(a, p: int) -> float:
    """Schatten p-norm with the normalized trace: (N^-1 sum sigma_i^p)^(1/p)."""
    a = _as_matrix(a)
    _require_square(a)
    if p < 1:
        raise ValueError(f"p must be an integer >= 1, got {p}")
    s = np.linalg.svd(a, compute_uv=False)
    return float(np.mean(s ** p) ** (1.0 / p))


def normalized_trace(a) -> float:
    """Mean of the diagonal, i.e. Tr(A)/N."""
    a = _as_matrix(a)
    n = _require_square(a)
    return float(np.trace(a) / n)
