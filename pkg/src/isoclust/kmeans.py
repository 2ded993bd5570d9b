"""Lloyd's K-Means with pluggable initialization and an optional
distance-pruned reassignment loop that skips full nearest-centroid scans."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datamodel import AlgoParams, Clustering, DataMatrix, pairwise_sq_dists, sse_of

# Relative slack on the prune bound; orders of magnitude above float64
# rounding so a skipped point is provably still nearest its own centroid.
PRUNE_SLACK = 1e-9


@dataclass
class KMeansState:
    """Loop state of one run: current centroids, assignments, and the
    per-point distance to the assigned centroid used by the pruned loop."""

    centroids: np.ndarray      # (k, d)
    labels: np.ndarray         # (n,)
    nearest_dist: np.ndarray   # (n,) distance to assigned centroid
    iteration: int


def assign_points(data: DataMatrix, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-centroid assignment; ties go to the lowest cluster index."""
    centroids = np.asarray(centroids, dtype=np.float64)
    if centroids.ndim != 2 or centroids.shape[1] != data.n_cols:
        raise ValueError("centroid dimension != n_cols")
    sq = pairwise_sq_dists(data.values, centroids)
    labels = np.argmin(sq, axis=1)                   # argmin takes the first minimum
    nearest = np.sqrt(sq[np.arange(len(labels)), labels])
    return labels, nearest


def update_centroids(data: DataMatrix, labels: np.ndarray,
                     k: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Per-cluster means; empty clusters are repaired before returning."""
    centroids, sizes, _ = _update_with_repair(data, np.asarray(labels, dtype=np.intp), k)
    return centroids, sizes


def _update_with_repair(data: DataMatrix, labels: np.ndarray,
                        k: int | None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Means + empty-cluster repair. Returns (centroids, sizes, repaired labels).

    Repair rule: an emptied cluster is reseeded with the point farthest from
    its current centroid, stolen from a donor cluster of size >= 2.
    """
    x = data.values
    n, d = x.shape
    if k is None:
        k = int(labels.max()) + 1
    if labels.min() < 0 or labels.max() >= k:
        raise ValueError("label out of range")

    labels = labels.copy()
    sizes = np.bincount(labels, minlength=k)
    sums = np.zeros((k, d))
    np.add.at(sums, labels, x)
    centroids = np.where(sizes[:, None] > 0, sums / np.maximum(sizes, 1)[:, None], 0.0)

    while np.any(sizes == 0):
        empty = int(np.flatnonzero(sizes == 0)[0])
        dist_own = np.sqrt(np.sum((x - centroids[labels]) ** 2, axis=1))
        dist_own[sizes[labels] < 2] = -np.inf        # singleton donors would just move the hole
        far = int(np.argmax(dist_own))
        if not np.isfinite(dist_own[far]):
            raise ValueError("cannot repair empty cluster: no donor with >= 2 points")
        donor = labels[far]
        labels[far] = empty
        sizes[empty] = 1
        sizes[donor] -= 1
        centroids[empty] = x[far]
        centroids[donor] = x[labels == donor].mean(axis=0)

    return centroids, sizes, labels


def random_init(data: DataMatrix, k: int, seed: int) -> np.ndarray:
    """k distinct data rows chosen by a seeded PCG64 generator."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > data.n_rows:
        raise ValueError(f"k={k} exceeds n_rows={data.n_rows}")
    rng = np.random.default_rng(seed)
    idx = rng.choice(data.n_rows, size=k, replace=False)
    return data.values[idx].copy()


def run_kmeans(data: DataMatrix, init: np.ndarray, params: AlgoParams,
               pruned: bool = False, sse_log: list[float] | None = None) -> Clustering:
    """Alternate assignment and mean update until labels stop changing, the
    max centroid displacement drops below the tolerance, or the iteration cap.

    pruned=True skips the full k-way scan for points whose distance to their
    own (moved) centroid has not increased AND provably remains below every
    other centroid's possible distance; results are identical to pruned=False.
    """
    x = data.values
    n = data.n_rows
    centroids = np.asarray(init, dtype=np.float64).copy()
    if centroids.ndim != 2 or centroids.shape[1] != data.n_cols:
        raise ValueError("init must be k x n_cols")
    k = centroids.shape[0]
    if k < 1:
        raise ValueError("init must contain at least one centroid")

    state = KMeansState(
        centroids=centroids,
        labels=np.full(n, -1, dtype=np.intp),
        nearest_dist=np.zeros(n),
        iteration=0,
    )
    second_bound = np.full(n, -np.inf)   # lower bound on distance to 2nd-nearest centroid
    force_full_scan = True
    prev_labels = None

    for iteration in range(1, params.max_kmeans_iterations + 1):
        state.iteration = iteration

        if not pruned or force_full_scan:
            sq = pairwise_sq_dists(x, state.centroids)
            state.labels = np.argmin(sq, axis=1)
            state.nearest_dist = np.sqrt(sq[np.arange(n), state.labels])
            if pruned and k >= 2:
                sq[np.arange(n), state.labels] = np.inf
                second_bound = np.sqrt(sq.min(axis=1))
            force_full_scan = False
        else:
            _pruned_reassign(x, state, second_bound)

        if not np.all(np.isfinite(state.nearest_dist)):
            raise ArithmeticError("non-finite distance encountered")
        if sse_log is not None:
            sse_log.append(float(np.sum(state.nearest_dist ** 2)))

        if prev_labels is not None and np.array_equal(state.labels, prev_labels):
            break

        new_centroids, sizes, repaired = _update_with_repair(data, state.labels, k)
        if not np.array_equal(repaired, state.labels):
            state.labels = repaired
            force_full_scan = True       # repair teleports centroids; prune state is stale
        displacement = np.sqrt(np.sum((new_centroids - state.centroids) ** 2, axis=1))
        if pruned and not force_full_scan and k >= 2:
            second_bound -= displacement.max()
        state.centroids = new_centroids
        prev_labels = state.labels
        if displacement.max() < params.convergence_tol:
            break

    centroids, sizes, labels = _update_with_repair(data, state.labels, k)
    return Clustering(
        labels=labels,
        centroids=centroids,
        sizes=sizes,
        sse=sse_of(x, labels, centroids),
        iterations=state.iteration,
    )


def _pruned_reassign(x: np.ndarray, state: KMeansState, second_bound: np.ndarray) -> None:
    """One assignment sweep that rescans only points whose own centroid moved
    away or might have been overtaken by another centroid."""
    n = x.shape[0]
    diff = x - state.centroids[state.labels]
    own = np.sqrt(np.sum(diff * diff, axis=1))
    stays = (own <= state.nearest_dist) & (own < second_bound - PRUNE_SLACK * (1.0 + own))
    state.nearest_dist = np.where(stays, own, state.nearest_dist)

    rescan = np.flatnonzero(~stays)
    if rescan.size:
        sq = pairwise_sq_dists(x[rescan], state.centroids)
        labels = np.argmin(sq, axis=1)
        state.labels = state.labels.copy()
        state.labels[rescan] = labels
        state.nearest_dist[rescan] = np.sqrt(sq[np.arange(rescan.size), labels])
        sq[np.arange(rescan.size), labels] = np.inf
        second_bound[rescan] = np.sqrt(sq.min(axis=1))
