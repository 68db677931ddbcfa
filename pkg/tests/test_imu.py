import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from canrev.frame_model import PreconditionError
from canrev.imu_pipeline import smooth, split_inertial_signals
from canrev.recording_io import ImuSeries


def windowed_mean_oracle(t, y, window):
    half = window / 2.0
    return np.array([y[np.abs(t - ti) <= half].mean() for ti in t])


class TestSplit:
    def test_sign_split(self):
        acc, dec = split_inertial_signals(ImuSeries([0.0, 0.01, 0.02], [-1.0, 2.0, 0.0]), 0)
        assert acc.magnitudes.tolist() == [1.0, 0.0, 0.0]
        assert dec.magnitudes.tolist() == [0.0, 2.0, 0.0]
        assert (acc.kind, dec.kind) == ("acceleration", "deceleration")

    def test_forward_positive(self):
        acc, dec = split_inertial_signals(ImuSeries([0.0, 0.01], [-1.0, 2.0]), 0, forward_negative=False)
        assert acc.magnitudes.tolist() == [0.0, 2.0]
        assert dec.magnitudes.tolist() == [1.0, 0.0]

    def test_zeros(self):
        acc, dec = split_inertial_signals(ImuSeries(np.arange(10) / 100, np.zeros(10)))
        assert not acc.magnitudes.any() and not dec.magnitudes.any()
        assert not np.signbit(acc.magnitudes).any()

    def test_errors(self):
        with pytest.raises(PreconditionError):
            split_inertial_signals(ImuSeries([], []))
        with pytest.raises(PreconditionError):
            split_inertial_signals(ImuSeries([0.0], [1.0]), -0.1)
        with pytest.raises(PreconditionError):
            split_inertial_signals(ImuSeries([1.0, 0.0], [1.0, 1.0]), 0)

    def test_duplicate_timestamps(self):
        acc, _ = split_inertial_signals(ImuSeries([0.0, 0.0, 0.01], [-1.0, -5.0, -2.0]), 0)
        assert acc.timestamps.tolist() == [0.0, 0.01]
        assert acc.magnitudes.tolist() == [5.0, 2.0]

    def test_white_noise_matches_oracle(self, rng):
        t = np.arange(1000) / 100.0
        y = rng.normal(size=t.shape)
        acc, dec = split_inertial_signals(ImuSeries(t, y), 0.5)
        expected = windowed_mean_oracle(t, y, 0.5)
        np.testing.assert_allclose(acc.magnitudes, np.maximum(-expected, 0), atol=1e-12)
        np.testing.assert_allclose(dec.magnitudes, np.maximum(expected, 0), atol=1e-12)

    @given(
        st.lists(st.floats(-50, 50), min_size=1, max_size=60),
        st.floats(0, 1.0),
    )
    def test_invariants(self, ys, window):
        t = np.arange(len(ys)) * 0.01
        y = np.array(ys)
        acc, dec = split_inertial_signals(ImuSeries(t, y), window)
        assert len(acc) == len(dec) == len(ys)
        assert (acc.magnitudes >= 0).all() and (dec.magnitudes >= 0).all()
        assert (np.diff(acc.timestamps) > 0).all()
        np.testing.assert_allclose(acc.magnitudes - dec.magnitudes, -smooth(t, y, window), atol=1e-9)
        if window == 0:
            assert not (acc.magnitudes * dec.magnitudes).any()


class TestSmooth:
    def test_identity_at_zero(self, rng):
        t = np.sort(rng.uniform(0, 10, 50))
        y = rng.normal(size=50)
        np.testing.assert_array_equal(smooth(t, y, 0.0), y)

    def test_edges_truncated(self):
        t = np.arange(5, dtype=float)
        y = np.array([0.0, 0.0, 0.0, 0.0, 10.0])
        out = smooth(t, y, 2.0)
        assert out.tolist() == pytest.approx([0.0, 0.0, 0.0, 10 / 3, 5.0])

    @given(st.lists(st.floats(0.001, 0.05), min_size=1, max_size=80), st.floats(0, 0.5), st.randoms(use_true_random=False))
    def test_irregular_grid(self, steps, window, rnd):
        t = np.cumsum(steps)
        y = np.array([rnd.uniform(-5, 5) for _ in steps])
        np.testing.assert_allclose(smooth(t, y, window), windowed_mean_oracle(t, y, window), atol=1e-9)
