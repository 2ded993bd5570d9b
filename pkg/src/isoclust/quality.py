"""Clustering quality measures: Rousseeuw silhouette coefficients and SSE reporting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datamodel import Clustering, DataMatrix, pairwise_dists

# Pairwise distances are accumulated in fixed-size row blocks so the n x n
# matrix is never materialized; the block size is a constant, never derived
# from the environment, to keep reductions deterministic.
_BLOCK_ROWS = 128


@dataclass(frozen=True)
class SilhouetteResult:
    per_point: np.ndarray         # (n,) values in [-1, 1]
    mean: float
    per_cluster_mean: np.ndarray  # (k,)


@dataclass(frozen=True)
class QualityReport:
    final_k: int
    sse: float
    silhouette_mean: float | None        # None when k < 2
    silhouette_mean_x100: float | None
    iterations: int
    elapsed: float                       # seconds


def _cluster_distance_sums(data: DataMatrix, labels: np.ndarray, k: int) -> np.ndarray:
    """(n, k) matrix of summed distances from each point to each cluster's members."""
    x = data.values
    n = x.shape[0]
    onehot = np.zeros((n, k))
    onehot[np.arange(n), labels] = 1.0
    sums = np.empty((n, k))
    for start in range(0, n, _BLOCK_ROWS):
        stop = min(start + _BLOCK_ROWS, n)
        sums[start:stop] = pairwise_dists(x[start:stop], x) @ onehot
    return sums


def silhouette(data: DataMatrix, clustering: Clustering) -> SilhouetteResult:
    """Rousseeuw silhouette: s(i) = (b - a) / max(a, b) with a the mean
    distance to own-cluster members and b the smallest mean distance to
    another cluster; singleton points score exactly 0."""
    k = clustering.k
    if k < 2:
        raise ValueError("silhouette undefined for fewer than 2 clusters")
    labels = clustering.labels
    n = data.n_rows
    sizes = clustering.sizes

    sums = _cluster_distance_sums(data, labels, k)
    own_size = sizes[labels]

    with np.errstate(invalid="ignore", divide="ignore"):
        a = sums[np.arange(n), labels] / (own_size - 1)
    means_other = sums / sizes[None, :]
    means_other[np.arange(n), labels] = np.inf
    b = means_other.min(axis=1)

    with np.errstate(invalid="ignore", divide="ignore"):
        s = (b - a) / np.maximum(a, b)
    s = np.where(np.maximum(a, b) == 0.0, 0.0, s)    # duplicate points across clusters
    s = np.where(own_size == 1, 0.0, s)              # singleton convention

    per_cluster = np.array([s[labels == j].mean() for j in range(k)])
    return SilhouetteResult(
        per_point=s,
        mean=float(s.mean()),
        per_cluster_mean=per_cluster,
    )


def quality_report(data: DataMatrix, clustering: Clustering,
                   elapsed: float) -> QualityReport:
    """Package one run's quality numbers; silhouette fields are absent for k=1."""
    if clustering.k >= 2:
        sil = silhouette(data, clustering).mean
        sil_x100 = 100.0 * sil
    else:
        sil = None
        sil_x100 = None
    return QualityReport(
        final_k=clustering.k,
        sse=clustering.sse,
        silhouette_mean=sil,
        silhouette_mean_x100=sil_x100,
        iterations=clustering.iterations,
        elapsed=elapsed,
    )
