"""Windowed spectral low-pass mixing along SFC orderings.

Each curve ordering turns the token matrix into a 1D sequence; overlapping
windows are rFFT'd along the token axis, gated in the spectrum, inverse
transformed, and reassembled by squared-Hann overlap-add. The per-curve
results are fused by uniform averaging and added back as a residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import TokenMatrix
from .errors import CurveLengthMismatch

ZERO_WEIGHT_EPS = 1e-12


def lowpass_gate(window: int, k_low: int = 128):
    """Binary gate keeping the first k_low rFFT bins of a length-L window."""
    n_bins = window // 2 + 1
    gate = np.zeros(n_bins)
    gate[: min(k_low, n_bins)] = 1.0
    return gate


@dataclass(frozen=True)
class EnhancerConfig:
    window: int = 64
    stride: int = 16
    gate: np.ndarray = None  # (window//2 + 1,) nonnegative
    curves: tuple = ()  # CurveOrders built from the token centers
    mean_center: bool = False  # subtract/restore per-window channel means

    def __post_init__(self):
        if not 1 <= self.stride <= self.window:
            raise ValueError(f"stride {self.stride} outside 1..{self.window}")
        gate = self.gate
        if gate is None:
            gate = lowpass_gate(self.window)
        gate = np.asarray(gate, dtype=np.float64)
        if gate.shape != (self.window // 2 + 1,):
            raise ValueError(
                f"gate length {gate.shape} != rFFT bins of window {self.window}"
            )
        if (gate < 0).any():
            raise ValueError("gate entries must be nonnegative")
        object.__setattr__(self, "gate", gate)


def rfft_forward(x, axis=-1):
    """Real FFT along ``axis``: the first n//2+1 complex DFT coefficients."""
    return np.fft.rfft(x, axis=axis)


def rfft_inverse(bins, n, axis=-1):
    """Inverse of rfft_forward for a length-n real signal."""
    return np.fft.irfft(bins, n=n, axis=axis)


def squared_hann(window: int):
    """hann(n)^2 with hann(n) = 0.5 (1 - cos(2 pi n / (L-1))); zero endpoints."""
    if window == 1:
        return np.ones(1)
    n = np.arange(window)
    h = 0.5 * (1.0 - np.cos(2.0 * np.pi * n / (window - 1)))
    return h * h


def _mix_window(window, gate, mean_center):
    """Gate one window (any length) in its rFFT spectrum."""
    n = window.shape[0]
    if mean_center:
        mean = window.mean(axis=0, keepdims=True)
        window = window - mean
    spectrum = rfft_forward(window, axis=0) * gate[: n // 2 + 1, None]
    out = rfft_inverse(spectrum, n=n, axis=0)
    if mean_center:
        out = out + mean
    return out


def windowed_mix(seq, cfg: EnhancerConfig):
    """Transform a K x d sequence window-by-window and overlap-add.

    Windows start at 0, stride, 2*stride, ...; windows running past the
    sequence end are clipped (the gate truncates to the shorter bin count).
    The accumulated output is divided by the accumulated squared-Hann
    weight; positions whose squared-Hann mass vanishes (window endpoints
    with no overlap) take the plain average of their covering windows'
    mixed values, so an all-ones gate is exactly the identity and an
    all-zeros gate annihilates.
    """
    seq = np.asarray(seq, dtype=np.float64)
    k, d = seq.shape
    L, R = cfg.window, cfg.stride
    starts = np.arange(0, k, R)
    w = squared_hann(L)

    acc = np.zeros((k, d))
    acc_w = np.zeros(k)
    acc_plain = np.zeros((k, d))
    count = np.zeros(k)

    full = starts[starts + L <= k]
    if full.size:
        windows = seq[full[:, None] + np.arange(L)]  # (n_win, L, d)
        if cfg.mean_center:
            means = windows.mean(axis=1, keepdims=True)
            windows = windows - means
        spectrum = rfft_forward(windows, axis=1) * cfg.gate[None, :, None]
        mixed = rfft_inverse(spectrum, n=L, axis=1)
        if cfg.mean_center:
            mixed = mixed + means
        weighted = mixed * w[None, :, None]
        # windows whose starts differ by >= L are disjoint; group every
        # ceil(L/R)-th window and scatter each group with one strided add
        phases = -(-L // R)
        step = phases * R
        for p in range(phases):
            sel = np.arange(p, full.shape[0], phases)
            if sel.size == 0:
                continue
            s0 = int(full[sel[0]])
            nw = sel.size
            strip = np.zeros((nw * step, d))
            strip_w = np.zeros(nw * step)
            strip_p = np.zeros((nw * step, d))
            strip_c = np.zeros(nw * step)
            strip.reshape(nw, step, d)[:, :L, :] = weighted[sel]
            strip_w.reshape(nw, step)[:, :L] = w
            strip_p.reshape(nw, step, d)[:, :L, :] = mixed[sel]
            strip_c.reshape(nw, step)[:, :L] = 1.0
            end = min(k, s0 + nw * step)
            acc[s0:end] += strip[: end - s0]
            acc_w[s0:end] += strip_w[: end - s0]
            acc_plain[s0:end] += strip_p[: end - s0]
            count[s0:end] += strip_c[: end - s0]

    for s0 in starts[starts + L > k]:
        s0 = int(s0)
        mixed = _mix_window(seq[s0:k], cfg.gate, cfg.mean_center)
        n = k - s0
        acc[s0:k] += mixed * w[:n, None]
        acc_w[s0:k] += w[:n]
        acc_plain[s0:k] += mixed
        count[s0:k] += 1.0

    out = np.empty_like(seq)
    weighted_pos = acc_w > ZERO_WEIGHT_EPS
    out[weighted_pos] = acc[weighted_pos] / acc_w[weighted_pos, None]
    out[~weighted_pos] = acc_plain[~weighted_pos] / count[~weighted_pos, None]
    return out


def enhance(tokens: TokenMatrix, cfg: EnhancerConfig) -> TokenMatrix:
    """Residual multi-curve enhancement: S + mean_over_curves(mix(S[perm]))."""
    if not cfg.curves:
        raise CurveLengthMismatch("config carries no curve orders")
    k = tokens.n_tokens
    mixed_sum = np.zeros_like(tokens.feats)
    for curve in cfg.curves:
        if curve.n != k:
            raise CurveLengthMismatch(
                f"curve over {curve.n} tokens applied to {k} tokens"
            )
        mixed = windowed_mix(tokens.feats[curve.perm], cfg)
        mixed_sum += mixed[curve.inv_perm]
    context = mixed_sum / len(cfg.curves)
    return TokenMatrix(feats=tokens.feats + context, centers=tokens.centers)
