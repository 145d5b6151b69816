"""Tests for the per-token channel-spectrum filter."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sfctok.errors import WidthMismatch
from sfctok.gfm import GfmConfig, gfm_apply


def naive_head_filter(row, gains):
    """O(D^2) DFT sums for a single head segment with real gains."""
    n = row.shape[0]
    bins = np.array(
        [sum(row[t] * np.exp(-2j * np.pi * f * t / n) for t in range(n))
         for f in range(n // 2 + 1)]
    )
    bins *= gains
    full = np.empty(n, dtype=complex)
    full[: n // 2 + 1] = bins
    for f in range(n // 2 + 1, n):
        full[f] = np.conj(full[n - f])
    out = np.array(
        [sum(full[f] * np.exp(2j * np.pi * f * t / n) for f in range(n)) / n
         for t in range(n)]
    )
    return out.real


class TestConfig:
    def test_identity_factory(self):
        cfg = GfmConfig.identity(16, heads=4)
        assert cfg.filters.shape == (4, 3)
        assert (cfg.filters == 1.0).all()

    def test_width_not_divisible(self):
        with pytest.raises(WidthMismatch):
            GfmConfig(width=10, heads=3, filters=np.ones((3, 2)))

    def test_wrong_filter_shape(self):
        with pytest.raises(WidthMismatch):
            GfmConfig(width=8, heads=2, filters=np.ones((2, 5)))


class TestApply:
    def test_all_ones_is_identity(self, rng):
        z = rng.normal(size=(6, 32))
        out = gfm_apply(z, GfmConfig.identity(32, heads=4))
        assert np.abs(out - z).max() <= 1e-12

    def test_zero_gains_halve(self, rng):
        z = rng.normal(size=(5, 16))
        cfg = GfmConfig(width=16, heads=2, filters=np.zeros((2, 5)))
        assert np.allclose(gfm_apply(z, cfg), z / 2, atol=1e-12)

    def test_single_head_dft_oracle(self, rng):
        d = 12
        z = rng.normal(size=(3, d))
        gains = rng.uniform(0.0, 2.0, size=d // 2 + 1)
        cfg = GfmConfig(width=d, heads=1, filters=gains[None, :])
        out = gfm_apply(z, cfg)
        for row, got in zip(z, out):
            expected = 0.5 * (row + naive_head_filter(row, gains))
            assert np.abs(got - expected).max() <= 1e-9

    def test_two_heads_match_split_application(self, rng):
        z = rng.normal(size=(4, 8))
        gains = rng.uniform(size=(2, 3))
        cfg = GfmConfig(width=8, heads=2, filters=gains)
        out = gfm_apply(z, cfg)
        left = gfm_apply(z[:, :4], GfmConfig(width=4, heads=1, filters=gains[:1]))
        right = gfm_apply(z[:, 4:], GfmConfig(width=4, heads=1, filters=gains[1:]))
        assert np.allclose(out, np.hstack([left, right]), atol=1e-12)

    def test_linearity(self, rng):
        z1 = rng.normal(size=(7, 24))
        z2 = rng.normal(size=(7, 24))
        cfg = GfmConfig(width=24, heads=3,
                        filters=rng.uniform(size=(3, 5)))
        lhs = gfm_apply(2.0 * z1 + 0.5 * z2, cfg)
        rhs = 2.0 * gfm_apply(z1, cfg) + 0.5 * gfm_apply(z2, cfg)
        assert np.abs(lhs - rhs).max() <= 1e-10

    def test_token_independence(self, rng):
        z = rng.normal(size=(10, 16))
        cfg = GfmConfig(width=16, heads=4, filters=rng.uniform(size=(4, 3)))
        full = gfm_apply(z, cfg)
        single = gfm_apply(z[4:5], cfg)
        assert np.allclose(full[4], single[0], atol=1e-12)

    def test_width_mismatch(self, rng):
        with pytest.raises(WidthMismatch):
            gfm_apply(rng.normal(size=(2, 9)), GfmConfig.identity(8))

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_property_output_real_and_bounded(self, seed):
        rng = np.random.Generator(np.random.PCG64(seed))
        heads = int(rng.integers(1, 4))
        head_w = 2 * int(rng.integers(2, 6))
        d = heads * head_w
        k = int(rng.integers(1, 8))
        z = rng.normal(size=(k, d))
        gains = rng.uniform(0.0, 1.0, size=(heads, head_w // 2 + 1))
        out = gfm_apply(z, GfmConfig(width=d, heads=heads, filters=gains))
        assert out.dtype == np.float64
        # gains in [0, 1] keep each head's spectral energy at most the input's
        for h in range(heads):
            seg = slice(h * head_w, (h + 1) * head_w)
            assert (out[:, seg] ** 2).sum() <= (z[:, seg] ** 2).sum() + 1e-9
