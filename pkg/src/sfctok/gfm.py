"""Global filter: per-token channel-spectrum gains with averaged residual.

Each token row is split into H contiguous head segments; every segment is
rFFT'd along the channel axis, multiplied by its head's real gain vector,
inverse transformed, and blended as (z + z_mixed) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import WidthMismatch


@dataclass(frozen=True)
class GfmConfig:
    width: int  # D
    heads: int  # H, divides D
    filters: np.ndarray  # (H, (D/H)//2 + 1) real gains per head

    def __post_init__(self):
        if self.width % self.heads != 0:
            raise WidthMismatch(f"width {self.width} not divisible by {self.heads} heads")
        filters = np.asarray(self.filters, dtype=np.float64)
        head_bins = (self.width // self.heads) // 2 + 1
        if filters.shape != (self.heads, head_bins):
            raise WidthMismatch(
                f"filters {filters.shape} != ({self.heads}, {head_bins})"
            )
        object.__setattr__(self, "filters", filters)

    @classmethod
    def identity(cls, width, heads=1):
        head_bins = (width // heads) // 2 + 1
        return cls(width=width, heads=heads, filters=np.ones((heads, head_bins)))


def gfm_apply(z, cfg: GfmConfig):
    """Filter K x D token rows in the channel spectrum; output is real."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] != cfg.width:
        raise WidthMismatch(f"input {z.shape} vs width {cfg.width}")
    if (cfg.filters == 1.0).all():  # unit gains: transform is a no-op, skip it
        return z.copy()
    k = z.shape[0]
    head_w = cfg.width // cfg.heads
    heads = z.reshape(k, cfg.heads, head_w)
    spectrum = np.fft.rfft(heads, axis=2) * cfg.filters[None, :, :]
    mixed = np.fft.irfft(spectrum, n=head_w, axis=2).reshape(k, cfg.width)
    return 0.5 * (z + mixed)
