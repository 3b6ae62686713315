import math

import numpy as np
import pytest

from skelscore.degrade import degrade_downsample, degrade_noise, voxel_average
from skelscore.geometry import PointCloud, SkeletalPointSet, bounding_box_diagonal
from skelscore.synth import fibonacci_sphere


class TestNoise:
    def test_zero(self):
        pts = fibonacci_sphere(100)
        np.testing.assert_array_equal(degrade_noise(pts, 0.0), pts)

    def test_reproducible(self):
        pts = fibonacci_sphere(100)
        assert degrade_noise(pts, 0.05, seed=3).tobytes() == degrade_noise(pts, 0.05, seed=3).tobytes()
        assert not np.array_equal(degrade_noise(pts, 0.05, seed=3), degrade_noise(pts, 0.05, seed=4))

    def test_mean_displacement(self):
        pts = np.random.default_rng(0).uniform(size=(200000, 3))
        sigma = 0.05 * bounding_box_diagonal(pts)
        disp = np.linalg.norm(degrade_noise(pts, 0.05, seed=1) - pts, axis=1).mean()
        assert disp == pytest.approx(sigma * math.sqrt(8 / math.pi), rel=0.01)

    def test_reference_diagonal(self):
        pts = np.zeros((50000, 3))
        pts[1, 0] = 1e-3
        disp = np.linalg.norm(degrade_noise(pts, 0.05, seed=0, reference_diagonal=1.6) - pts, axis=1)
        assert disp.mean() == pytest.approx(0.08 * math.sqrt(8 / math.pi), rel=0.02)

    def test_keeps_wrapper(self):
        s = SkeletalPointSet(fibonacci_sphere(10), np.arange(10))
        out = degrade_noise(s, 0.05)
        assert isinstance(out, SkeletalPointSet) and out.correspondence is not None

    def test_negative(self):
        with pytest.raises(ValueError):
            degrade_noise(np.zeros((3, 3)), -0.1)


class TestDownsample:
    def test_identity(self):
        pts = fibonacci_sphere(500)
        np.testing.assert_array_equal(degrade_downsample(pts, 500), pts)

    def test_sphere_4096_to_1024(self):
        out = degrade_downsample(fibonacci_sphere(4096), 1024)
        assert abs(len(out) - 1024) <= 51

    def test_coincident(self):
        with pytest.warns(UserWarning):
            out = degrade_downsample(np.ones((8, 3)), 4)
        assert len(out) == 1

    def test_centroids(self):
        pts = np.array([[0, 0, 0], [0.1, 0, 0], [5, 5, 5], [5.1, 5, 5.0]])
        out = voxel_average(pts, 1.0)
        np.testing.assert_allclose(sorted(map(tuple, out)), [(0.05, 0, 0), (5.05, 5, 5)])

    def test_too_many(self):
        with pytest.raises(ValueError):
            degrade_downsample(np.zeros((3, 3)), 4)

    def test_returns_plain_cloud(self):
        out = degrade_downsample(PointCloud(fibonacci_sphere(400)), 100)
        assert isinstance(out, PointCloud)
