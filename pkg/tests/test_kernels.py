import numpy as np
import pytest

from canrev import _purekernels as pure
from canrev import kernels

ck = pytest.importorskip("canrev._ckernels")


@pytest.fixture(params=range(5))
def seed(request):
    return request.param


class TestBackendEquivalence:
    def test_backend_selected(self):
        assert kernels.BACKEND in ("cython", "python")

    def test_decode(self, seed):
        rng = np.random.default_rng(seed)
        payload = rng.integers(0, 256, (300, 8)).astype(np.uint8)
        lengths = rng.integers(8, 17, 60)
        anchors = np.where(lengths == 8, rng.integers(0, 8, 60), rng.integers(0, 7, 60))
        msb = rng.integers(0, 2, 60).astype(np.uint8)
        np.testing.assert_array_equal(
            ck.decode_channels(payload, anchors, lengths, msb), pure.decode_channels(payload, anchors, lengths, msb)
        )

    def test_nearest(self, seed):
        rng = np.random.default_rng(seed)
        # coarse grids force exact ties
        a = np.sort(rng.integers(0, 200, 150)) / 4.0
        b = np.unique(rng.integers(0, 200, 90)) / 4.0
        np.testing.assert_array_equal(ck.nearest_indices(a, b), pure.nearest_indices(a, b))
        np.testing.assert_array_equal(ck.nearest_indices(b, a), pure.nearest_indices(b, a))

    def test_pearson(self, seed):
        rng = np.random.default_rng(seed)
        x, y = rng.normal(size=400), rng.normal(size=400)
        assert ck.pearson(x, y) == pytest.approx(pure.pearson(x, y), abs=1e-12)
        assert np.isnan(ck.pearson(np.ones(5), np.arange(5.0)))
        assert np.isnan(pure.pearson(np.ones(5), np.arange(5.0)))

    def test_pearson_rows(self, seed):
        rng = np.random.default_rng(seed)
        m = rng.integers(0, 5, (20, 100)).astype(np.int64)
        m[3] = 7
        y = rng.normal(size=100)
        np.testing.assert_allclose(ck.pearson_rows(m, y), pure.pearson_rows(m, y), atol=1e-12, equal_nan=True)

    def test_moving_average(self, seed):
        rng = np.random.default_rng(seed)
        t = np.cumsum(rng.choice([0.0, 0.01, 0.02], 500))
        y = rng.normal(size=500)
        for hw in (0.0, 0.05, 0.25):
            np.testing.assert_allclose(ck.moving_average(t, y, hw), pure.moving_average(t, y, hw), atol=1e-12)

    def test_diff_stdev(self, seed):
        rng = np.random.default_rng(seed)
        v = rng.integers(0, 4096, 300)
        for ddof in (0, 1):
            assert ck.diff_stdev(v, ddof) == pytest.approx(pure.diff_stdev(v, ddof), rel=1e-12)


def test_env_forces_pure_backend():
    import os
    import subprocess
    import sys

    env = dict(os.environ, CANREV_PURE_PYTHON="1")
    proc = subprocess.run([sys.executable, "-c", "import canrev; print(canrev.BACKEND)"], env=env, capture_output=True, text=True)
    assert proc.stdout.strip() == "python"
