import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbo.rescaling import augment, kmeans, minmax_stats, rescale


class TestKmeans:
    def test_two_tight_groups(self):
        rng = np.random.default_rng(0)
        a = rng.uniform(-0.3, 0.3, size=(5, 2))
        b = np.array([10.0, 10.0]) + rng.uniform(-0.3, 0.3, size=(5, 2))
        centroids = kmeans(np.vstack([a, b]), 2, seed=1)
        d_a = np.min(np.linalg.norm(centroids - np.array([0.0, 0.0]), axis=1))
        d_b = np.min(np.linalg.norm(centroids - np.array([10.0, 10.0]), axis=1))
        assert d_a <= 0.5 and d_b <= 0.5

    def test_identical_points_single_cluster(self):
        pts = np.tile([1.5, -2.0], (4, 1))
        centroids = kmeans(pts, 1, seed=0)
        np.testing.assert_allclose(centroids[0], [1.5, -2.0])

    def test_deterministic(self):
        rng = np.random.default_rng(4)
        pts = rng.normal(size=(20, 3))
        c1 = kmeans(pts, 4, seed=9)
        c2 = kmeans(pts, 4, seed=9)
        np.testing.assert_array_equal(c1, c2)

    def test_centroids_are_cluster_means(self):
        rng = np.random.default_rng(2)
        pts = rng.normal(size=(30, 2))
        centroids = kmeans(pts, 3, seed=5)
        d2 = np.sum((pts[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        labels = np.argmin(d2, axis=1)
        for c in range(3):
            members = pts[labels == c]
            if len(members):
                np.testing.assert_allclose(centroids[c], members.mean(axis=0), atol=1e-9)

    def test_needs_more_points_than_clusters(self):
        with pytest.raises(ValueError):
            kmeans(np.zeros((3, 2)), 3, seed=0)


class TestAugment:
    def test_cardinality_formula(self):
        # |X| + C(K+2, 2) + 2 on generic inputs
        rng = np.random.default_rng(1)
        pts = rng.uniform(-0.9, 0.9, size=(10, 2))
        aug = augment(pts, 5, [-1.0, -1.0], [1.0, 1.0], seed=0)
        assert len(aug.points) == 10 + math.comb(7, 2) + 2

    def test_cardinality_formula_many_instances(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(1, 5))
            count = int(rng.integers(6, 41))
            pts = rng.uniform(-0.95, 0.95, size=(count, n))
            aug = augment(pts, 5, -np.ones(n), np.ones(n), seed=int(rng.integers(1000)))
            assert len(aug.points) == count + math.comb(7, 2) + 2

    def test_small_sample_set_uses_samples_as_anchors(self):
        pts = np.array([[0.2, 0.1], [-0.4, 0.3]])
        aug = augment(pts, 5, [-1.0, -1.0], [1.0, 1.0], seed=0)
        # anchors = 2 samples + 2 corners -> 6 midpoints; all distinct here
        assert len(aug.midpoints) == 6
        assert len(aug.points) <= 10

    def test_sample_on_corner_deduplicated(self):
        pts = np.array([[-1.0, -1.0], [0.5, 0.5]])
        aug = augment(pts, 5, [-1.0, -1.0], [1.0, 1.0], seed=0)
        corner_hits = np.sum(np.linalg.norm(aug.points - np.array([-1.0, -1.0]), axis=1) <= 1e-9)
        assert corner_hits == 1

    def test_contains_samples_and_corners(self):
        rng = np.random.default_rng(3)
        pts = rng.uniform(-0.5, 0.5, size=(8, 3))
        lo, hi = -np.ones(3), np.ones(3)
        aug = augment(pts, 5, lo, hi, seed=2)
        for p in pts:
            assert np.min(np.linalg.norm(aug.points - p, axis=1)) <= 1e-12
        assert np.min(np.linalg.norm(aug.points - lo, axis=1)) <= 1e-12
        assert np.min(np.linalg.norm(aug.points - hi, axis=1)) <= 1e-12

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        pts = rng.uniform(-1, 1, size=(12, 2))
        a1 = augment(pts, 5, -np.ones(2), np.ones(2), seed=3)
        a2 = augment(pts, 5, -np.ones(2), np.ones(2), seed=3)
        np.testing.assert_array_equal(a1.points, a2.points)


class TestMinMax:
    def test_basic_stats(self):
        stats = minmax_stats([2.0, 6.0, 4.0])
        assert stats.h_min == 2.0
        assert stats.h_max == 6.0
        assert stats.delta == 4.0
        assert rescale(4.0, stats) == pytest.approx(0.5)

    def test_constant_nonzero_uses_value(self):
        stats = minmax_stats([3.0, 3.0, 3.0])
        assert stats.delta == 3.0

    def test_constant_zero_uses_one(self):
        stats = minmax_stats([0.0, 0.0])
        assert stats.delta == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            minmax_stats([])

    def test_rescale_endpoints(self):
        stats = minmax_stats([-1.0, 3.0, 1.0])
        assert rescale(-1.0, stats) == 0.0
        assert rescale(3.0, stats) == 1.0
        assert rescale(1.0, stats) == pytest.approx(0.5)

    @settings(max_examples=100, deadline=None)
    @given(
        vals=st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=20),
        a=st.floats(-1e6, 1e6),
        b=st.floats(-1e6, 1e6),
    )
    def test_order_preserving(self, vals, a, b):
        stats = minmax_stats(vals)
        # strictness is only representable when the gap survives the division
        if stats.delta > 0 and a < b and (b - a) > 1e-9 * stats.delta:
            assert rescale(a, stats) < rescale(b, stats)

    def test_source_values_land_in_unit_interval(self):
        rng = np.random.default_rng(9)
        vals = rng.normal(size=40)
        stats = minmax_stats(vals)
        scaled = rescale(vals, stats)
        assert np.all(scaled >= 0.0) and np.all(scaled <= 1.0)
