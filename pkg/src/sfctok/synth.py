"""Seeded synthetic indoor-like scenes for tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .core import PointCloud


def make_scene(
    n_points,
    seed=0,
    n_blobs=40,
    room=(8.0, 8.0, 3.0),
    sigma=0.25,
):
    """Gaussian blobs scattered in a box, RGB features in [0, 1].

    Blob structure gives voxel superpoints spatial coherence, mimicking an
    over-segmented indoor scan.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    room = np.asarray(room, dtype=np.float64)
    blob_centers = rng.uniform(0.0, 1.0, size=(n_blobs, 3)) * room
    assign = rng.integers(0, n_blobs, size=n_points)
    positions = blob_centers[assign] + rng.normal(0.0, sigma, size=(n_points, 3))
    positions = np.clip(positions, 0.0, room)
    features = rng.uniform(0.0, 1.0, size=(n_points, 3))
    return PointCloud(positions=positions, features=features)
