"""Pipeline configuration and the flat key=value config-file format."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

SEED_ENV_VAR = "SFCTOK_SEED"


@dataclass
class PipelineConfig:
    sample_n: int = 50000  # uniform seeded subsample size
    tokens: int = 256  # output token budget T
    width: int = 256  # feature width d
    window: int = 64  # FFT window length L
    stride: int = 16  # FFT window stride R
    k_low: int = 128  # retained low-frequency bins
    bits: int = 10  # SFC quantization depth
    graph_stride: int = 16  # point-level voting stride r
    graph_window: int = 32  # point-level voting radius W
    graph_k: int = 8  # neighbors kept per superpoint
    tau: float = 0.05  # Sinkhorn temperature
    sinkhorn_iters: int = 5
    sinkhorn_tol: float = 1e-6
    svd_rank: int = 32
    voxel_cell: float = 0.05  # fallback segmentation cell (meters)
    seed: int = 0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name != "seed" and v <= 0:
                raise ValueError(f"config field {f.name}={v} must be positive")

    def with_env_seed(self):
        """Return a copy with the seed overridden by SFCTOK_SEED, if set."""
        env = os.environ.get(SEED_ENV_VAR)
        if env is None:
            return self
        return dataclasses.replace(self, seed=int(env))


def parse_config_file(path) -> dict:
    """Read a flat key=value file; '#' starts a comment, blank lines skipped."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, raw = (part.strip() for part in line.split("=", 1))
            values[key] = raw
    return values


def config_from_sources(file_values=None, overrides=None) -> PipelineConfig:
    """Build a config from defaults, then file values, then CLI overrides."""
    fields = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}
    merged = {}
    for source in (file_values or {}), (overrides or {}):
        for key, raw in source.items():
            if raw is None:
                continue
            if key not in fields:
                raise ValueError(f"unknown config key: {key}")
            caster = float if fields[key] in ("float", float) else int
            merged[key] = caster(raw)
    return PipelineConfig(**merged).with_env_seed()
