"""Benchmark harness: graph-build scaling, brute-force oracle, recall."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig
from .graph import candidate_pair_count
from .pipeline import build_vote_graph
from .synth import make_scene
from .tokenizer import voxel_superpoints

BENCH_CSV_COLUMNS = (
    "n_points",
    "trial",
    "n_superpoints",
    "build_seconds",
    "oracle_seconds",
    "candidate_pairs",
    "candidate_pairs_closed_form",
    "edge_count",
    "recall",
)


def boundary_knn_oracle(positions, labels, n_superpoints, k, chunk=4096):
    """Brute-force top-k superpoint neighbors by minimum inter-superpoint
    point-pair distance.

    Scans all point pairs (chunked) and segment-reduces per label pair,
    deliberately quadratic in N. Returns a per-node array of neighbor sets.
    """
    order = np.argsort(labels, kind="stable")
    pos = positions[order]
    lab = labels[order]
    m = n_superpoints
    boundaries = np.flatnonzero(np.diff(lab)) + 1
    col_starts = np.concatenate(([0], boundaries))
    col_labels = lab[col_starts]

    min_d2 = np.full((m, m), np.inf)
    n = pos.shape[0]
    sq = np.einsum("ij,ij->i", pos, pos)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        block = pos[lo:hi]
        d2 = sq[lo:hi, None] + sq[None, :] - 2.0 * (block @ pos.T)
        per_label = np.minimum.reduceat(d2, col_starts, axis=1)  # (chunk, M')
        row_lab = lab[lo:hi]
        row_starts = np.concatenate(
            ([0], np.flatnonzero(np.diff(row_lab)) + 1)
        )
        reduced = np.minimum.reduceat(per_label, row_starts, axis=0)
        rows = row_lab[row_starts]
        sub = min_d2[np.ix_(rows, col_labels)]
        min_d2[np.ix_(rows, col_labels)] = np.minimum(sub, reduced)
    np.fill_diagonal(min_d2, np.inf)

    # stable argsort breaks distance ties by neighbor index, i.e. (dist, dst)
    order = np.argsort(min_d2, axis=1, kind="stable")
    ranked_d2 = np.take_along_axis(min_d2, order, axis=1)
    neighbors = []
    for s in range(m):
        finite = order[s][np.isfinite(ranked_d2[s])][:k]
        neighbors.append(set(int(t) for t in finite))
    return neighbors


def graph_recall(vote_graph, oracle_neighbors):
    """Fraction of oracle edges present in the built graph."""
    hits = 0
    total = 0
    for s, oracle in enumerate(oracle_neighbors):
        total += len(oracle)
        built = set(int(t) for t in vote_graph.neighbors(s))
        hits += len(oracle & built)
    return hits / total if total else 1.0


def fit_loglog_slope(sizes, seconds):
    """Least-squares slope of log(seconds) against log(size)."""
    x = np.log(np.asarray(sizes, dtype=np.float64))
    y = np.log(np.asarray(seconds, dtype=np.float64))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


@dataclass
class BenchRow:
    n_points: int
    trial: int
    n_superpoints: int
    build_seconds: float
    oracle_seconds: float  # nan when skipped
    candidate_pairs: int
    candidate_pairs_closed_form: int
    edge_count: int
    recall: float  # nan when oracle skipped

    def csv(self):
        return (
            f"{self.n_points},{self.trial},{self.n_superpoints},"
            f"{self.build_seconds:.6f},{self.oracle_seconds:.6f},"
            f"{self.candidate_pairs},{self.candidate_pairs_closed_form},"
            f"{self.edge_count},{self.recall:.4f}"
        )


def bench_scene(n_points, seed, cfg: PipelineConfig, voxel_cell=0.4):
    """Seeded scene plus voxel superpoints sized for graph benchmarking."""
    cloud = make_scene(n_points, seed=seed)
    part = voxel_superpoints(cloud, voxel_cell)
    return cloud, part


def run_bench(sizes, trials, cfg: PipelineConfig, oracle_cap=20000, repeats=3):
    """Time graph builds (and the oracle below ``oracle_cap``) per size."""
    rows = []
    for n in sizes:
        for trial in range(trials):
            cloud, part = bench_scene(n, seed=cfg.seed + trial, cfg=cfg)
            best = np.inf
            for _ in range(repeats):
                t0 = time.perf_counter()
                vote_graph, n_votes = build_vote_graph(
                    cloud.positions, part.labels, part.centers, cfg
                )
                best = min(best, time.perf_counter() - t0)
            pairs = candidate_pair_count(
                cloud.n_points, cfg.graph_stride, cfg.graph_window
            )
            closed = 4 * (cloud.n_points // cfg.graph_stride + (cloud.n_points % cfg.graph_stride > 0)) * (
                2 * cfg.graph_window + 1
            )
            oracle_seconds = float("nan")
            recall = float("nan")
            if n <= oracle_cap:
                t0 = time.perf_counter()
                oracle = boundary_knn_oracle(
                    cloud.positions, part.labels, part.n_superpoints, cfg.graph_k
                )
                oracle_seconds = time.perf_counter() - t0
                recall = graph_recall(vote_graph, oracle)
            rows.append(
                BenchRow(
                    n_points=cloud.n_points,
                    trial=trial,
                    n_superpoints=part.n_superpoints,
                    build_seconds=best,
                    oracle_seconds=oracle_seconds,
                    candidate_pairs=pairs,
                    candidate_pairs_closed_form=closed,
                    edge_count=int(vote_graph.dst.shape[0]),
                    recall=recall,
                )
            )
    return rows
