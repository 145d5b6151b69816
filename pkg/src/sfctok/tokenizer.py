"""Initial superpoint tokens: Fourier coordinate embedding + MLP features.

Point-level tokens are the sum of a parameter-free Fourier embedding of
box-normalized coordinates and a shallow MLP projection of the point
features; superpoint tokens average-pool them per label. Also hosts the
coordinate prompt tokens and the voxel fallback segmenter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .core import (
    SENTINEL,
    PointCloud,
    SeededWeights,
    SuperpointPartition,
    TokenMatrix,
    build_partition,
)
from .errors import EmptySuperpoint, KTooLarge, ShapeMismatch, WidthTooSmall


@dataclass(frozen=True)
class FourierEmbedConfig:
    """Geometric frequency bands base^0 .. base^{num_freqs-1} per axis.

    Output width d holds sin/cos pairs over 3 axes (6 entries per band);
    the remainder beyond 6*num_freqs is zero-padded.
    """

    d: int
    base: float = 2.0

    @property
    def num_freqs(self):
        return self.d // 6


def _box_normalize(positions, bounds=None):
    """Scale coordinates into [0,1]^3 by the bounding box; flat axes map to 0."""
    positions = np.asarray(positions, dtype=np.float64)
    if bounds is None:
        lo = positions.min(axis=0)
        hi = positions.max(axis=0)
    else:
        lo, hi = bounds
    span = hi - lo
    u = np.zeros_like(positions)
    for axis in range(3):
        if span[axis] > 0.0:
            u[:, axis] = (positions[:, axis] - lo[axis]) / span[axis]
    return u


def fourier_embed(positions, cfg: FourierEmbedConfig, bounds=None):
    """K x d sin/cos features of box-relative coordinates, bounded in [-1, 1].

    ``bounds`` overrides the normalization box (lo, hi); by default the box
    is the input's own extrema, which makes the embedding translation
    invariant.
    """
    if cfg.d < 6:
        raise WidthTooSmall(f"embedding width {cfg.d} < 6")
    u = _box_normalize(positions, bounds)  # (K, 3)
    freqs = cfg.base ** np.arange(cfg.num_freqs)  # (F,)
    phase = 2.0 * np.pi * u[:, :, None] * freqs[None, None, :]  # (K, 3, F)
    out = np.zeros((u.shape[0], cfg.d))
    used = 6 * cfg.num_freqs
    out[:, : used // 2] = np.sin(phase).reshape(u.shape[0], -1)
    out[:, used // 2 : used] = np.cos(phase).reshape(u.shape[0], -1)
    return out


def mlp_project(features, weights: SeededWeights):
    """Forward pass of the shallow point-feature MLP (ReLU between layers)."""
    x = np.asarray(features, dtype=np.float64)
    for i in range(weights.n_layers):
        w, b = weights.layer(i)
        if x.shape[1] != w.shape[0]:
            raise ShapeMismatch(
                f"layer {i}: input width {x.shape[1]} != fan-in {w.shape[0]}"
            )
        x = x @ w + b
        if i < weights.n_layers - 1:
            x = np.maximum(x, 0.0)
    return x


def point_tokens(cloud: PointCloud, weights: SeededWeights, cfg: FourierEmbedConfig):
    """N x d point-level tokens: MLP(features) + FourierEmbed(positions)."""
    feat = mlp_project(cloud.features, weights)
    coor = fourier_embed(cloud.positions, cfg)
    if feat.shape != coor.shape:
        raise ShapeMismatch(f"{feat.shape} vs {coor.shape}")
    return feat + coor


def superpoint_pool(x0, part: SuperpointPartition) -> TokenMatrix:
    """Average point tokens per superpoint; sentinel points are excluded."""
    x0 = np.asarray(x0, dtype=np.float64)
    labels = part.labels
    m = part.n_superpoints
    valid = labels != SENTINEL
    counts = np.bincount(labels[valid], minlength=m)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise EmptySuperpoint(int(empty[0]))
    sums = np.zeros((m, x0.shape[1]))
    np.add.at(sums, labels[valid], x0[valid])
    return TokenMatrix(feats=sums / counts[:, None], centers=part.centers)


def coordinate_prompt(query, cloud: PointCloud, k: int, cfg: FourierEmbedConfig):
    """One coordinate token per query: its Fourier embedding averaged with
    the embeddings of its k exact nearest cloud points.

    All embeddings share the cloud's bounding box so queries and neighbors
    live in the same coordinate frame.
    """
    query = np.atleast_2d(np.asarray(query, dtype=np.float64))
    n = cloud.n_points
    if k > n:
        raise KTooLarge(f"k={k} > {n} points")
    lo = cloud.positions.min(axis=0)
    hi = cloud.positions.max(axis=0)
    q_emb = fourier_embed(query, cfg, bounds=(lo, hi))
    if k == 0:
        return q_emb
    tree = cKDTree(cloud.positions)
    _, idx = tree.query(query, k=k)
    idx = np.atleast_2d(idx.reshape(query.shape[0], k))
    p_emb = fourier_embed(cloud.positions, cfg, bounds=(lo, hi))
    neigh_mean = p_emb[idx].mean(axis=1)
    return (q_emb + k * neigh_mean) / (k + 1)


def knn_indices(query, positions, k):
    """Exact Euclidean k-nearest-neighbor indices (cKDTree-backed)."""
    tree = cKDTree(positions)
    _, idx = tree.query(np.atleast_2d(query), k=k)
    return idx.reshape(-1, k)


def voxel_superpoints(cloud: PointCloud, cell: float) -> SuperpointPartition:
    """Fallback segmentation: points sharing a voxel cell share a label.

    Labels are compacted to {0..M-1} in lexicographic voxel order, which is
    deterministic for a fixed input.
    """
    if cell <= 0:
        raise ValueError(f"cell size {cell} must be positive")
    keys = np.floor(cloud.positions / cell).astype(np.int64)
    _, labels = np.unique(keys, axis=0, return_inverse=True)
    return build_partition(labels.astype(np.int64), cloud.positions)
