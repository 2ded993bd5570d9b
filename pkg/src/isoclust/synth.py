"""Deterministic synthetic Gaussian blob generator for tests and desk-scale runs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datamodel import DataMatrix, default_col_ids


@dataclass(frozen=True)
class BlobSpec:
    centers: tuple[tuple[float, ...], ...]
    points_per_center: int
    sigma: float
    seed: int

    def __post_init__(self):
        centers = tuple(tuple(float(v) for v in c) for c in self.centers)
        if not centers:
            raise ValueError("centers must be nonempty")
        d = len(centers[0])
        if d < 1 or any(len(c) != d for c in centers):
            raise ValueError("centers must share one dimension >= 1")
        if self.points_per_center < 1:
            raise ValueError("points_per_center must be >= 1")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        object.__setattr__(self, "centers", centers)


def _box_muller(rng: np.random.Generator, count: int) -> np.ndarray:
    """count standard normals via Box-Muller on PCG64 uniforms."""
    pairs = (count + 1) // 2
    u1 = 1.0 - rng.random(pairs)         # (0, 1]: keeps log finite
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])
    return z[:count]


def generate_blobs(spec: BlobSpec) -> tuple[DataMatrix, np.ndarray]:
    """Isotropic Gaussian blobs, one seeded substream per center so adding a
    center never perturbs earlier blobs. Returns (matrix, ground-truth labels)."""
    d = len(spec.centers[0])
    m = spec.points_per_center
    blocks = []
    for b, center in enumerate(spec.centers):
        rng = np.random.default_rng([spec.seed, b])
        z = _box_muller(rng, m * d).reshape(m, d)
        blocks.append(np.asarray(center) + spec.sigma * z)
    values = np.vstack(blocks)
    labels = np.repeat(np.arange(len(spec.centers)), m)
    row_ids = tuple(f"g{i + 1}" for i in range(values.shape[0]))
    return DataMatrix(values, row_ids, default_col_ids(d)), labels
