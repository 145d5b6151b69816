"""Encoder-free 3D scene tokenization: superpoints, SFC serialization,
windowed FFT context mixing, sparse vote graphs, and optimal-transport
token merging."""

from .config import PipelineConfig
from .core import (
    SENTINEL,
    PointCloud,
    SeededWeights,
    SuperpointPartition,
    TokenMatrix,
    seeded_init,
    validate_cloud,
)
from .pipeline import PipelineResult, PipelineWeights, run_pipeline

__all__ = [
    "SENTINEL",
    "PipelineConfig",
    "PipelineResult",
    "PipelineWeights",
    "PointCloud",
    "SeededWeights",
    "SuperpointPartition",
    "TokenMatrix",
    "run_pipeline",
    "seeded_init",
    "validate_cloud",
]

__version__ = "0.1.0"
