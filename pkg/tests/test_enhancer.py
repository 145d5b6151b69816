import numpy as np
import pytest

from sfctok.core import TokenMatrix
from sfctok.enhancer import (
    EnhancerConfig,
    enhance,
    lowpass_gate,
    rfft_forward,
    rfft_inverse,
    squared_hann,
    windowed_mix,
)
from sfctok.errors import CurveLengthMismatch
from sfctok.sfc import CurveKind, serialize, serialize_all


def identity_cfg(window=64, stride=16, curves=()):
    return EnhancerConfig(
        window=window, stride=stride, gate=np.ones(window // 2 + 1), curves=curves
    )


class TestRfft:
    def test_constant_signal_dc_only(self):
        bins = rfft_forward(np.full(16, 3.0))
        assert np.isclose(bins[0], 48.0)
        assert np.allclose(bins[1:], 0.0, atol=1e-12)

    def test_roundtrip(self, rng):
        x = rng.normal(size=64)
        back = rfft_inverse(rfft_forward(x), n=64)
        assert np.abs(back - x).max() < 1e-10 * np.linalg.norm(x)

    def test_cosine_concentrates_in_bin(self):
        n = 64
        x = np.cos(2 * np.pi * 3 * np.arange(n) / n)
        # direct DFT sum oracle for bin 3
        oracle = sum(x[i] * np.exp(-2j * np.pi * 3 * i / n) for i in range(n))
        bins = rfft_forward(x)
        assert np.isclose(bins[3], oracle)
        mags = np.abs(bins)
        assert mags[3] > 100 * np.delete(mags, 3).max()

    def test_parseval(self, rng):
        n = 50
        x = rng.normal(size=n)
        bins = rfft_forward(x)
        # Hermitian pairs counted twice except DC and (for even n) Nyquist
        weights = np.full(bins.shape[0], 2.0)
        weights[0] = 1.0
        if n % 2 == 0:
            weights[-1] = 1.0
        spectral = (weights * np.abs(bins) ** 2).sum() / n
        assert np.isclose((x**2).sum(), spectral, rtol=1e-10)


class TestWindowedMix:
    @pytest.mark.parametrize("k", [1, 5, 63, 64, 65, 300])
    def test_identity_gate(self, rng, k):
        x = rng.normal(size=(k, 4))
        y = windowed_mix(x, identity_cfg())
        assert np.abs(y - x).max() <= 1e-8 * max(np.abs(x).max(), 1.0)

    def test_constant_sequence_lowpass(self):
        x = np.full((100, 3), 2.5)
        cfg = EnhancerConfig(window=64, stride=16, gate=lowpass_gate(64, 8))
        assert np.allclose(windowed_mix(x, cfg), x)

    def test_single_window_dc_gate_gives_window_mean(self, rng):
        x = rng.normal(size=(64, 5))
        cfg = EnhancerConfig(window=64, stride=64, gate=lowpass_gate(64, 1))
        y = windowed_mix(x, cfg)
        m = x.mean(axis=0)
        # zero-weight endpoints fall back to the mixed value, also the mean
        assert np.allclose(y, np.tile(m, (64, 1)))

    def test_zero_weight_positions_detected(self):
        w = squared_hann(64)
        assert w[0] == 0.0 and w[-1] == 0.0
        assert (w[1:-1] > 0).all()

    def test_channel_independence(self, rng):
        x = rng.normal(size=(40, 6))
        x[:, 2] = 0.0
        cfg = EnhancerConfig(window=16, stride=4, gate=lowpass_gate(16, 3))
        y = windowed_mix(x, cfg)
        assert np.allclose(y[:, 2], 0.0, atol=1e-14)


class TestEnhance:
    def make_tokens(self, rng, k=100, d=8):
        centers = rng.uniform(size=(k, 3))
        return TokenMatrix(feats=rng.normal(size=(k, d)), centers=centers)

    def test_zero_gate_is_identity(self, rng):
        s = self.make_tokens(rng)
        curves = tuple(serialize_all(s.centers, b=8))
        cfg = EnhancerConfig(window=64, stride=16, gate=np.zeros(33), curves=curves)
        out = enhance(s, cfg)
        assert np.allclose(out.feats, s.feats)

    def test_identity_gate_single_curve_doubles(self, rng):
        s = self.make_tokens(rng)
        curve = serialize(s.centers, CurveKind.HILBERT, b=8)
        out = enhance(s, identity_cfg(curves=(curve,)))
        assert np.allclose(out.feats, 2 * s.feats, rtol=1e-8)

    def test_four_tokens_closed_form(self, rng):
        # K=4, L=4, R=4, DC-only gate, one x-sorted curve
        centers = np.array([[0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0], [3.0, 0, 0]])
        feats = rng.normal(size=(4, 3))
        s = TokenMatrix(feats=feats, centers=centers)
        curve = serialize(centers, CurveKind.ZORDER, b=4)
        assert np.array_equal(curve.perm, np.arange(4))
        cfg = EnhancerConfig(window=4, stride=4, gate=lowpass_gate(4, 1), curves=(curve,))
        out = enhance(s, cfg)
        mean = feats.mean(axis=0)
        expected = feats + mean
        assert np.allclose(out.feats, expected)

    def test_linearity(self, rng):
        s = self.make_tokens(rng)
        curves = tuple(serialize_all(s.centers, b=8))
        cfg = EnhancerConfig(
            window=32, stride=8, gate=lowpass_gate(32, 5), curves=curves
        )
        base = enhance(s, cfg).feats
        for alpha in (0.0, 1.0, 2.5):
            scaled = TokenMatrix(feats=alpha * s.feats, centers=s.centers)
            assert np.allclose(enhance(scaled, cfg).feats, alpha * base, rtol=1e-9,
                               atol=1e-12)

    def test_permutation_consistency(self, rng):
        s = self.make_tokens(rng, k=60)
        shuffle = rng.permutation(60)
        cfg_a = EnhancerConfig(
            window=16, stride=4, gate=lowpass_gate(16, 3),
            curves=tuple(serialize_all(s.centers, b=8)),
        )
        s2 = TokenMatrix(feats=s.feats[shuffle], centers=s.centers[shuffle])
        cfg_b = EnhancerConfig(
            window=16, stride=4, gate=lowpass_gate(16, 3),
            curves=tuple(serialize_all(s2.centers, b=8)),
        )
        a = enhance(s, cfg_a).feats
        b = enhance(s2, cfg_b).feats
        assert np.allclose(a[shuffle], b, rtol=1e-9, atol=1e-12)

    def test_curve_length_mismatch(self, rng):
        s = self.make_tokens(rng, k=10)
        bad_curve = serialize(rng.uniform(size=(11, 3)), CurveKind.ZORDER, b=4)
        with pytest.raises(CurveLengthMismatch):
            enhance(s, identity_cfg(curves=(bad_curve,)))

    def test_centers_unchanged(self, rng):
        s = self.make_tokens(rng)
        curves = tuple(serialize_all(s.centers, b=8))
        out = enhance(s, identity_cfg(curves=curves))
        assert np.array_equal(out.centers, s.centers)
