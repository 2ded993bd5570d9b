"""ISODATA-style outer loop around K-Means: discard undersized clusters,
split high-variance clusters, merge close clusters under an automatically
generated merge factor, plus the fully deterministic seeded pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .datamodel import (AlgoParams, Clustering, DataMatrix, pairwise_dists,
                        sse_of)
from .enhanced_init import init_centroids
from .kmeans import run_kmeans


class HistoryRecord(NamedTuple):
    iteration: int
    k: int
    sse: float
    action: str      # seed | split | merge | discard | stable


@dataclass
class OuterState:
    clustering: Clustering
    outer_iteration: int
    merge_factor: float
    history: list[HistoryRecord] = field(default_factory=list)


def compute_merge_factor(centroids: np.ndarray) -> float:
    """Minimum over clusters of the mean distance to all other centroids."""
    centroids = np.asarray(centroids, dtype=np.float64)
    k = centroids.shape[0]
    if k < 2:
        raise ValueError("merge factor needs at least 2 clusters")
    dists = pairwise_dists(centroids, centroids)
    avg = dists.sum(axis=1) / (k - 1)        # own distance is exactly 0
    return float(avg.min())


def _finalize(data: DataMatrix, labels: np.ndarray, centroids: np.ndarray,
              iterations: int) -> Clustering:
    sizes = np.bincount(labels, minlength=centroids.shape[0])
    return Clustering(
        labels=labels,
        centroids=centroids,
        sizes=sizes,
        sse=sse_of(data.values, labels, centroids),
        iterations=iterations,
    )


def merge_pass(data: DataMatrix, clustering: Clustering, merge_factor: float,
               params: AlgoParams) -> Clustering:
    """Merge centroid pairs closer than the merge factor, nearest pairs first.

    Each cluster merges at most once per pass; at most floor(k_init/2) merges.
    The merged centroid is the size-weighted mean of the pair.
    """
    k = clustering.k
    if k < 2 or merge_factor <= 0:
        return clustering

    dists = pairwise_dists(clustering.centroids, clustering.centroids)
    candidates = [
        (dists[i, j], i, j)
        for i in range(k) for j in range(i + 1, k)
        if dists[i, j] < merge_factor
    ]
    candidates.sort()

    centroids = clustering.centroids.copy()
    sizes = clustering.sizes.copy()
    labels = clustering.labels.copy()
    merged = np.zeros(k, dtype=bool)
    alive = np.ones(k, dtype=bool)
    budget = params.k_init // 2

    for _, i, j in candidates:
        if budget == 0:
            break
        if merged[i] or merged[j]:
            continue
        total = sizes[i] + sizes[j]
        centroids[i] = (sizes[i] * centroids[i] + sizes[j] * centroids[j]) / total
        sizes[i] = total
        labels[labels == j] = i
        merged[i] = merged[j] = True
        alive[j] = False
        budget -= 1

    if alive.all():
        return clustering

    remap = np.cumsum(alive) - 1
    return _finalize(data, remap[labels], centroids[alive], clustering.iterations)


def split_pass(data: DataMatrix, clustering: Clustering,
               params: AlgoParams) -> Clustering:
    """Split clusters whose per-dimension spread exceeds the whole-dataset
    spread by more than the split multiplier, largest ratio first.

    The split offsets the centroid by +/- (offset fraction * cluster sigma)
    along the single worst dimension; members go to the nearer of the pair.
    """
    x = data.values
    sigma_d = x.std(axis=0)                  # population, consistent with ingest
    usable = sigma_d > 0.0

    ratios = []
    for j in range(clustering.k):
        if clustering.sizes[j] <= 2 * (params.min_cluster_size + 1):
            continue
        members = x[clustering.labels == j]
        sigma_c = members.std(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(usable, sigma_c / sigma_d, -np.inf)
        dim = int(np.argmax(ratio))
        if ratio[dim] > params.split_multiplier:
            ratios.append((-ratio[dim], j, dim, sigma_c[dim]))
    if not ratios:
        return clustering
    ratios.sort()

    centroids = clustering.centroids.copy()
    labels = clustering.labels.copy()
    next_index = clustering.k
    for _, j, dim, sigma in ratios:
        offset = params.split_offset_fraction * sigma
        upper = centroids[j].copy()
        upper[dim] += offset
        lower = centroids[j].copy()
        lower[dim] -= offset
        members = np.flatnonzero(labels == j)
        # nearer of the pair reduces to the worst-dimension coordinate test;
        # points exactly at the centre go with the upper half
        go_lower = x[members, dim] < centroids[j, dim]
        if not go_lower.any() or go_lower.all():
            continue                     # rounding put everyone on one side
        centroids[j] = upper
        centroids = np.vstack([centroids, lower[None, :]])
        labels[members[go_lower]] = next_index
        next_index += 1

    if next_index == clustering.k:
        return clustering
    return _finalize(data, labels, centroids, clustering.iterations)


def discard_small(data: DataMatrix, clustering: Clustering,
                  params: AlgoParams) -> Clustering:
    """Delete clusters smaller than the minimum size, smallest first, always
    leaving at least 2 survivors; orphans go to the nearest surviving centroid."""
    k = clustering.k
    undersized = [j for j in range(k) if clustering.sizes[j] < params.min_cluster_size]
    if not undersized or k <= 2:
        return clustering

    undersized.sort(key=lambda j: (clustering.sizes[j], j))
    alive = np.ones(k, dtype=bool)
    survivors = k
    for j in undersized:
        if survivors <= 2:
            break
        alive[j] = False
        survivors -= 1
    if alive.all():
        return clustering

    labels = clustering.labels.copy()
    orphan = ~alive[labels]
    survivor_idx = np.flatnonzero(alive)
    nearest = np.argmin(
        pairwise_dists(data.values[orphan], clustering.centroids[survivor_idx]), axis=1)
    labels[orphan] = survivor_idx[nearest]

    centroids = clustering.centroids.copy()
    for j in np.unique(survivor_idx[nearest]):
        centroids[j] = data.values[labels == j].mean(axis=0)

    remap = np.cumsum(alive) - 1
    return _finalize(data, remap[labels], centroids[alive], clustering.iterations)


def run_agmfi(data: DataMatrix, init: np.ndarray,
              params: AlgoParams) -> tuple[Clustering, OuterState]:
    """Outer loop: K-Means from the current seeds, discard, then split on odd
    iterations and merge on even ones (forced merge at k >= 2*k_init, forced
    split at k <= ceil(k_init/2)), until nothing changes or the cap is hit."""
    state = OuterState(clustering=None, outer_iteration=0, merge_factor=0.0)
    centroids = np.asarray(init, dtype=np.float64)
    prev: Clustering | None = None

    for t in range(1, params.max_outer_iterations + 1):
        state.outer_iteration = t
        clustering = run_kmeans(data, centroids, params)
        state.history.append(HistoryRecord(t, clustering.k, clustering.sse, "seed"))

        shrunk = discard_small(data, clustering, params)
        if shrunk is not clustering:
            clustering = shrunk
            state.history.append(HistoryRecord(t, clustering.k, clustering.sse, "discard"))

        if clustering.k >= 2:
            state.merge_factor = compute_merge_factor(clustering.centroids)

        if clustering.k >= 2 * params.k_init:
            phase = "merge"
        elif clustering.k <= -(-params.k_init // 2):     # ceil(k_init/2)
            phase = "split"
        elif t % 2 == 1:
            phase = "split"
        else:
            phase = "merge"

        if phase == "merge" and clustering.k >= 2:
            clustering = merge_pass(data, clustering, state.merge_factor, params)
        else:
            clustering = split_pass(data, clustering, params)
        state.history.append(HistoryRecord(t, clustering.k, clustering.sse, phase))

        unchanged = (
            prev is not None
            and prev.k == clustering.k
            and np.array_equal(prev.labels, clustering.labels)
        )
        prev = clustering
        centroids = clustering.centroids
        if unchanged:
            state.history.append(HistoryRecord(t, clustering.k, clustering.sse, "stable"))
            break
        if clustering.k < 2:
            break

    final = run_kmeans(data, centroids, params)
    state.clustering = final
    state.history.append(
        HistoryRecord(state.outer_iteration, final.k, final.sse, "seed"))
    return final, state


def run_eagmfi(data: DataMatrix,
               params: AlgoParams) -> tuple[Clustering, OuterState]:
    """Deterministic pipeline: distance-from-origin seeding, then the
    split/merge outer loop. No random source anywhere."""
    if params.k_init > data.n_rows:
        raise ValueError(f"k_init={params.k_init} exceeds n_rows={data.n_rows}")
    seeds = init_centroids(data, params.k_init)
    return run_agmfi(data, seeds.centroids, params)
