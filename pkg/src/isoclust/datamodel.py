"""Core numeric types and the Euclidean distance kernel shared by every algorithm."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class DataMatrix:
    """n x d expression matrix: rows are genes/points, columns are conditions."""

    values: np.ndarray
    row_ids: tuple[str, ...]
    col_ids: tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError(f"values must be 2-D, got ndim={values.ndim}")
        n, d = values.shape
        if n < 1 or d < 1:
            raise ValueError(f"matrix must be at least 1x1, got {n}x{d}")
        if not np.all(np.isfinite(values)):
            raise ValueError("matrix contains non-finite entries")
        row_ids = tuple(self.row_ids)
        col_ids = tuple(self.col_ids)
        if len(row_ids) != n:
            raise ValueError(f"row_ids length {len(row_ids)} != n_rows {n}")
        if len(col_ids) != d:
            raise ValueError(f"col_ids length {len(col_ids)} != n_cols {d}")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "row_ids", row_ids)
        object.__setattr__(self, "col_ids", col_ids)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def replace_values(self, values: np.ndarray) -> "DataMatrix":
        """Same labels, new cell values (must keep the shape)."""
        if values.shape != self.values.shape:
            raise ValueError(f"shape changed: {self.values.shape} -> {values.shape}")
        return DataMatrix(values, self.row_ids, self.col_ids)


def default_row_ids(n: int) -> tuple[str, ...]:
    return tuple(f"g{i + 1}" for i in range(n))


def default_col_ids(d: int) -> tuple[str, ...]:
    return tuple(f"c{j + 1}" for j in range(d))


def make_matrix(values, row_ids=None, col_ids=None) -> DataMatrix:
    """DataMatrix from an array-like, synthesizing labels when absent."""
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    n, d = values.shape
    return DataMatrix(
        values,
        default_row_ids(n) if row_ids is None else tuple(row_ids),
        default_col_ids(d) if col_ids is None else tuple(col_ids),
    )


@dataclass(frozen=True)
class Clustering:
    """Labels + centroids + sizes: the universal algorithm output."""

    labels: np.ndarray       # (n,) int, values in [0, k)
    centroids: np.ndarray    # (k, d)
    sizes: np.ndarray        # (k,) int
    sse: float
    iterations: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.intp)
        centroids = np.asarray(self.centroids, dtype=np.float64)
        sizes = np.asarray(self.sizes, dtype=np.intp)
        k = centroids.shape[0]
        if labels.size and (labels.min() < 0 or labels.max() >= k):
            raise ValueError("label out of range [0, k)")
        counts = np.bincount(labels, minlength=k)
        if sizes.shape != (k,) or not np.array_equal(counts, sizes):
            raise ValueError("sizes inconsistent with labels")
        if np.any(sizes == 0):
            raise ValueError("finalized clustering has an empty cluster")
        if self.sse < 0:
            raise ValueError("sse must be nonnegative")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "centroids", centroids)
        object.__setattr__(self, "sizes", sizes)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


@dataclass(frozen=True)
class AlgoParams:
    """Knobs shared by K-Means and the split/merge outer loop."""

    k_init: int
    min_cluster_size: int = 2
    max_outer_iterations: int = 20
    split_multiplier: float = 1.0
    split_offset_fraction: float = 0.5
    convergence_tol: float = 1e-6
    max_kmeans_iterations: int = 100

    def __post_init__(self):
        if self.k_init < 1:
            raise ValueError("k_init must be >= 1")
        if self.min_cluster_size < 1:
            raise ValueError("min_cluster_size must be >= 1")
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be >= 1")
        if not self.split_multiplier > 0:
            raise ValueError("split_multiplier must be > 0")
        if not 0 < self.split_offset_fraction < 1:
            raise ValueError("split_offset_fraction must be in (0, 1)")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be > 0")
        if self.max_kmeans_iterations < 1:
            raise ValueError("max_kmeans_iterations must be >= 1")


def euclidean_distance(a, b) -> float:
    """sqrt(sum_j (a_j - b_j)^2) between two points of equal dimension."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("points must be 1-D")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] < 1:
        raise ValueError("points must have dimension >= 1")
    diff = a - b
    return float(np.sqrt(np.sum(diff * diff)))


def pairwise_sq_dists(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, (n, d) x (k, d) -> (n, k).

    Uses the direct difference form so each cell matches euclidean_distance
    squared bit-for-bit; the expanded x^2+c^2-2xc form is avoided because its
    cancellation error breaks exact tie handling.
    """
    diff = x[:, None, :] - c[None, :, :]
    return np.sum(diff * diff, axis=2)


def pairwise_dists(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Euclidean distances, (n, d) x (k, d) -> (n, k)."""
    return np.sqrt(pairwise_sq_dists(x, c))


def recompute_sse(data: DataMatrix, clustering: Clustering) -> float:
    """Sum over points of squared distance to their assigned centroid."""
    labels = np.asarray(clustering.labels)
    if labels.shape[0] != data.n_rows:
        raise ValueError("labels length != n_rows")
    if clustering.centroids.shape[1] != data.n_cols:
        raise ValueError("centroid dimension != n_cols")
    if labels.min() < 0 or labels.max() >= clustering.k:
        raise ValueError("label out of range")
    diff = data.values - clustering.centroids[labels]
    return float(np.sum(diff * diff))


def sse_of(data_values: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> float:
    """recompute_sse without requiring a finalized Clustering."""
    diff = data_values - centroids[labels]
    return float(np.sum(diff * diff))
