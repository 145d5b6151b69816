"""Shared domain types, validation, and seeded weight initialization.

All arrays are float64 in the reference path; types are frozen after
construction and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyCloud,
    EmptySuperpoint,
    FeatureRowMismatch,
    InvalidShape,
    NonFiniteCoordinate,
)

SENTINEL = -1


@dataclass(frozen=True)
class PointCloud:
    """N points with 3D coordinates (meters) and per-point feature channels."""

    positions: np.ndarray  # (N, 3)
    features: np.ndarray  # (N, C_in)

    @property
    def n_points(self):
        return self.positions.shape[0]

    @property
    def n_channels(self):
        return self.features.shape[1]


@dataclass(frozen=True)
class SuperpointPartition:
    """Point-to-superpoint assignment with per-superpoint centers and counts.

    ``labels`` holds values in {0..M-1} or SENTINEL (-1) for points outside
    any superpoint; sentinel points are skipped by all downstream operations.
    """

    labels: np.ndarray  # (N,) int
    centers: np.ndarray  # (M, 3)
    counts: np.ndarray  # (M,) int

    @property
    def n_superpoints(self):
        return self.centers.shape[0]


@dataclass(frozen=True)
class TokenMatrix:
    """A K x d feature matrix with paired 3D centers."""

    feats: np.ndarray  # (K, d)
    centers: np.ndarray  # (K, 3)

    @property
    def n_tokens(self):
        return self.feats.shape[0]

    @property
    def width(self):
        return self.feats.shape[1]


@dataclass(frozen=True)
class SeededWeights:
    """Flat forward-only MLP parameters, a pure function of (seed, shapes).

    Per layer of shape (fan_in, fan_out) the flat array stores fan_in*fan_out
    weight entries (row-major) followed by fan_out bias entries, all drawn
    uniformly from [-a, a] with a = sqrt(6 / (fan_in + fan_out)).
    """

    seed: int
    shapes: tuple = field(default=())
    values: np.ndarray = field(default=None)

    def layer(self, i):
        """Return (W, b) for layer i as views into the flat value array."""
        off = 0
        for j, (fi, fo) in enumerate(self.shapes):
            w_end = off + fi * fo
            b_end = w_end + fo
            if j == i:
                w = self.values[off:w_end].reshape(fi, fo)
                b = self.values[w_end:b_end]
                return w, b
            off = b_end
        raise IndexError(i)

    @property
    def n_layers(self):
        return len(self.shapes)


def validate_cloud(cloud: PointCloud) -> None:
    """Check every PointCloud invariant, raising exactly one typed error."""
    pos = np.asarray(cloud.positions)
    feat = np.asarray(cloud.features)
    if pos.ndim != 2 or pos.shape[1] != 3:
        raise FeatureRowMismatch(f"positions must be (N, 3), got {pos.shape}")
    if pos.shape[0] < 1:
        raise EmptyCloud("cloud has no points")
    bad = ~np.isfinite(pos).all(axis=1)
    if bad.any():
        raise NonFiniteCoordinate(int(np.flatnonzero(bad)[0]))
    if feat.ndim != 2 or feat.shape[0] != pos.shape[0]:
        raise FeatureRowMismatch(
            f"{pos.shape[0]} positions but {feat.shape[0]} feature rows"
        )
    if feat.shape[1] < 1:
        raise FeatureRowMismatch("feature width must be >= 1")


def seeded_init(seed: int, shapes) -> SeededWeights:
    """Deterministic Xavier-uniform initialization for a stack of layers.

    Bit-reproducible across runs and platforms for equal (seed, shapes):
    values come from a PCG64 stream keyed by the seed alone.
    """
    shapes = tuple((int(fi), int(fo)) for fi, fo in shapes)
    for fi, fo in shapes:
        if fi < 1 or fo < 1:
            raise InvalidShape(f"layer shape ({fi}, {fo})")
    rng = np.random.Generator(np.random.PCG64(seed))
    chunks = []
    for fi, fo in shapes:
        a = np.sqrt(6.0 / (fi + fo))
        chunks.append(rng.uniform(-a, a, size=fi * fo + fo))
    values = np.concatenate(chunks) if chunks else np.empty(0)
    return SeededWeights(seed=seed, shapes=shapes, values=values)


def build_partition(labels, positions) -> SuperpointPartition:
    """Construct a partition from per-point labels, computing centers/counts.

    Labels must already be dense in {0..M-1} (or SENTINEL); every label in
    that range must be populated.
    """
    labels = np.asarray(labels, dtype=np.int64)
    valid = labels != SENTINEL
    if not valid.any():
        raise EmptySuperpoint(0)
    m = int(labels[valid].max()) + 1
    counts = np.bincount(labels[valid], minlength=m)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise EmptySuperpoint(int(empty[0]))
    centers = np.zeros((m, 3))
    np.add.at(centers, labels[valid], positions[valid])
    centers /= counts[:, None]
    return SuperpointPartition(labels=labels, centers=centers, counts=counts)
