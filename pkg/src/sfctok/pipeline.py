"""End-to-end tokenization: cloud -> superpoints -> enhanced tokens -> T tokens."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import enhancer, graph, merger, sfc, tokenizer
from .config import PipelineConfig
from .core import PointCloud, SuperpointPartition, TokenMatrix, seeded_init
from .errors import StageError, SuggestLowerT


@dataclass
class PipelineWeights:
    """Forward-only parameters of the tokenize pipeline."""

    point_mlp: object
    importance_mlp: object
    projection: object

    @classmethod
    def from_seed(cls, seed, n_channels, width, svd_rank, tokens):
        return cls(
            point_mlp=seeded_init(seed, [(n_channels, width), (width, width)]),
            importance_mlp=seeded_init(seed + 1, [(width, width // 2), (width // 2, 1)]),
            projection=seeded_init(seed + 2, [(svd_rank, tokens)]),
        )


@dataclass
class PipelineResult:
    tokens: TokenMatrix
    n_points: int
    n_superpoints: int
    vote_count: int
    edge_count: int
    sinkhorn_residual: float
    sinkhorn_iterations: int
    stage_seconds: dict = field(default_factory=dict)

    def summary_lines(self):
        lines = [
            f"n_points={self.n_points}",
            f"n_superpoints={self.n_superpoints}",
            f"n_tokens={self.tokens.n_tokens}",
            f"width={self.tokens.width}",
            f"vote_count={self.vote_count}",
            f"edge_count={self.edge_count}",
            f"sinkhorn_residual={self.sinkhorn_residual:.6e}",
            f"sinkhorn_iterations={self.sinkhorn_iterations}",
        ]
        lines += [
            f"seconds_{name}={secs:.4f}" for name, secs in self.stage_seconds.items()
        ]
        return lines


def subsample(cloud: PointCloud, n, seed) -> PointCloud:
    """Uniform seeded subsample without replacement; identity when N <= n."""
    if cloud.n_points <= n:
        return cloud
    rng = np.random.Generator(np.random.PCG64(seed))
    idx = np.sort(rng.choice(cloud.n_points, size=n, replace=False))
    return PointCloud(
        positions=cloud.positions[idx], features=cloud.features[idx]
    )


class _Stage:
    def __init__(self, name, timings):
        self.name = name
        self.timings = timings

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.timings[self.name] = time.perf_counter() - self.t0
        if exc is not None and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


def run_pipeline(
    cloud: PointCloud,
    cfg: PipelineConfig,
    partition: SuperpointPartition | None = None,
    weights: PipelineWeights | None = None,
) -> PipelineResult:
    """Run the full tokenize pipeline and return T context-rich tokens.

    When ``partition`` is None the voxel fallback segments the (already
    subsampled) cloud. Labels passed in must align with the subsampled cloud;
    callers providing external labels should subsample beforehand.
    """
    timings = {}

    with _Stage("subsample", timings):
        scene = subsample(cloud, cfg.sample_n, cfg.seed)

    with _Stage("segment", timings):
        if partition is None:
            partition = tokenizer.voxel_superpoints(scene, cfg.voxel_cell)
        m = partition.n_superpoints
        if cfg.tokens > m:
            raise SuggestLowerT(
                f"T={cfg.tokens} exceeds M={m} superpoints; lower the token budget"
            )

    if weights is None:
        weights = PipelineWeights.from_seed(
            cfg.seed, scene.n_channels, cfg.width, cfg.svd_rank, cfg.tokens
        )

    with _Stage("tokenize", timings):
        embed_cfg = tokenizer.FourierEmbedConfig(d=cfg.width)
        x0 = tokenizer.point_tokens(scene, weights.point_mlp, embed_cfg)
        s = tokenizer.superpoint_pool(x0, partition)

    with _Stage("enhance", timings):
        token_curves = sfc.serialize_all(partition.centers, b=cfg.bits)
        enh_cfg = enhancer.EnhancerConfig(
            window=cfg.window,
            stride=cfg.stride,
            gate=enhancer.lowpass_gate(cfg.window, cfg.k_low),
            curves=tuple(token_curves),
        )
        s = enhancer.enhance(s, enh_cfg)

    with _Stage("graph", timings):
        point_curves = sfc.serialize_all(scene.positions, b=cfg.bits)
        votes = graph.window_vote(
            partition.labels, point_curves, cfg.graph_stride, cfg.graph_window
        )
        vote_count = votes.n_edges
        coalesced = graph.coalesce(votes)
        vote_graph = graph.rerank_topk(coalesced, partition.centers, cfg.graph_k)
        a_hat = graph.normalized_adjacency(vote_graph)

    with _Stage("merge", timings):
        y = merger.smooth_features(a_hat, s)
        rank = min(cfg.svd_rank, m, cfg.width)
        emb = merger.spectral_embed(y, rank, seed=cfg.seed)
        z = emb.z_emb
        if rank < cfg.svd_rank:  # keep the projection fan-in fixed
            z = np.pad(z, ((0, 0), (0, cfg.svd_rank - rank)))
        logits = merger.project_logits(z, weights.projection)
        mu = merger.importance_scores(s, weights.importance_mlp)
        nu = np.full(cfg.tokens, 1.0 / cfg.tokens)
        plan = merger.sinkhorn(
            logits,
            mu,
            nu,
            tau=cfg.tau,
            max_iters=cfg.sinkhorn_iters,
            residual_tol=cfg.sinkhorn_tol,
        )
        merged = merger.soft_pool(plan, s)

    return PipelineResult(
        tokens=merged,
        n_points=scene.n_points,
        n_superpoints=m,
        vote_count=vote_count,
        edge_count=int(vote_graph.dst.shape[0]),
        sinkhorn_residual=plan.residual,
        sinkhorn_iterations=plan.iterations,
        stage_seconds=timings,
    )


def build_vote_graph(positions, labels, centers, cfg: PipelineConfig):
    """Graph-construction slice of the pipeline, used by benchmarks."""
    point_curves = sfc.serialize_all(positions, b=cfg.bits)
    votes = graph.window_vote(labels, point_curves, cfg.graph_stride, cfg.graph_window)
    coalesced = graph.coalesce(votes)
    return graph.rerank_topk(coalesced, centers, cfg.graph_k), votes.n_edges
