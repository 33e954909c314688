"""Principal component analysis across signal channels."""
from dataclasses import dataclass

import numpy as np


@dataclass
class PcaModel:
    """Channel mean, orthonormal components (rows), descending eigenvalues."""
    mean: np.ndarray
    components: np.ndarray  # (k, C), rows orthonormal
    eigenvalues: np.ndarray  # (k,), descending, >= 0


def fit_pca(data) -> PcaModel:
    """Eigendecomposition of the (n-1)-divisor covariance of ``data`` (M, C).

    Components are sorted by descending eigenvalue; the sign of each component
    is fixed so its largest-magnitude entry is positive.
    """
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"data must be 2-d, got shape {x.shape}")
    m, c = x.shape
    if m < 2:
        raise ValueError("need at least 2 observation rows to fit PCA")
    if not np.all(np.isfinite(x)):
        raise ValueError("data contains non-finite values")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (m - 1)
    return pca_from_covariance(mean, cov)


def pca_from_covariance(mean, cov) -> PcaModel:
    """Build a model from a precomputed channel mean and covariance."""
    mean = np.asarray(mean, dtype=np.float64)
    cov = np.asarray(cov, dtype=np.float64)
    eigenvalues, vectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.maximum(eigenvalues[order], 0.0)
    components = vectors[:, order].T
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return PcaModel(mean, np.ascontiguousarray(components), eigenvalues)


def pca_project(model: PcaModel, data, k: int) -> np.ndarray:
    """Project rows onto the first ``k`` components: (data - mean) @ W[:k].T."""
    x = np.asarray(data, dtype=np.float64)
    if not 1 <= k <= model.components.shape[0]:
        raise ValueError(
            f"k={k} out of range 1..{model.components.shape[0]}")
    return (x - model.mean) @ model.components[:k].T


def pca_reconstruct(model: PcaModel, projected) -> np.ndarray:
    """Map component-space rows back to channel space (plus the mean)."""
    z = np.asarray(projected, dtype=np.float64)
    k = z.shape[-1]
    return z @ model.components[:k] + model.mean
