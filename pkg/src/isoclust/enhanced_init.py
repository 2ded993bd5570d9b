"""Deterministic centroid seeding: shift nonnegative, sort by distance from origin,
partition into k consecutive sets, take each set's lower-median point."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datamodel import DataMatrix


@dataclass(frozen=True)
class InitCentroids:
    centroids: np.ndarray        # (k, d), original (unshifted) data rows
    source_rows: np.ndarray      # (k,) original row indices, one per partition set


def shift_nonnegative(data: DataMatrix) -> tuple[DataMatrix, float]:
    """Subtract the global minimum entry when any entry is negative.

    The single scalar minimum is used (not per-column), so all inter-point
    distances are unchanged; only distances from the origin move.
    """
    minimum = float(data.values.min())
    if minimum >= 0.0:
        return data, 0.0
    return data.replace_values(data.values - minimum), minimum


def init_centroids(data: DataMatrix, k: int) -> InitCentroids:
    """Pick k seed rows: lower medians of k near-equal runs of the
    distance-from-origin ordering (computed on the shifted data)."""
    n = data.n_rows
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise ValueError(f"k={k} exceeds n_rows={n}")

    shifted, _ = shift_nonnegative(data)
    sq_norms = np.sum(shifted.values * shifted.values, axis=1)
    order = np.argsort(sq_norms, kind="stable")      # ties keep row order

    base, extra = divmod(n, k)
    source_rows = np.empty(k, dtype=np.intp)
    start = 0
    for s in range(k):
        q = base + (1 if s < extra else 0)           # first (n mod k) sets get the extra point
        source_rows[s] = order[start + (q - 1) // 2]  # lower median of the set
        start += q

    return InitCentroids(
        centroids=data.values[source_rows].copy(),
        source_rows=source_rows,
    )
