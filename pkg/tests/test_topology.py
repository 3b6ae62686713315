import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from skelscore.geometry import PersistenceBarcode
from skelscore.oracles import oracle_h0_persistence, oracle_matching_distance
from skelscore.topology import (
    TopologicalSimilarity,
    bottleneck_distance,
    classify_similarity,
    filter_barcode,
    h0_barcode,
    mst_edge_weights,
    nearest_neighbor_threshold,
    topological_similarity,
    wasserstein_distance,
)


def bars(*deaths):
    return PersistenceBarcode([[0.0, d] for d in deaths])


def sorted_bars(bc):
    return np.array(sorted(map(tuple, bc.bars)))


class TestNearestNeighborThreshold:
    def test_two_points(self):
        assert nearest_neighbor_threshold([[0, 0, 0], [0.7, 0, 0]]) == pytest.approx(0.7)

    def test_square_corners(self):
        sq = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]
        assert nearest_neighbor_threshold(sq) == pytest.approx(1.0)

    def test_collinear(self):
        assert nearest_neighbor_threshold([[0, 0, 0], [1, 0, 0], [3, 0, 0]]) == pytest.approx(2.0)

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            nearest_neighbor_threshold([[0, 0, 0]])


class TestH0Barcode:
    def test_single_point(self):
        bc = h0_barcode([[1.0, 2.0, 3.0]], eps_max=1.6)
        np.testing.assert_array_equal(bc.bars, [[0.0, 1.6]])
        assert bc.essential.tolist() == [True]

    def test_two_points(self):
        bc = h0_barcode([[0, 0, 0], [0.5, 0, 0]], eps_max=1.6)
        np.testing.assert_allclose(sorted_bars(bc), [[0, 0.5], [0, 1.6]])
        assert bc.essential.sum() == 1

    def test_three_collinear(self):
        bc = h0_barcode([[0, 0, 0], [1, 0, 0], [2, 0, 0]], eps_max=1.6)
        np.testing.assert_allclose(sorted_bars(bc), [[0, 1], [0, 1], [0, 1.6]])

    def test_components_beyond_cap_are_essential(self):
        pts = [[0, 0, 0], [0.1, 0, 0], [5, 0, 0]]
        bc = h0_barcode(pts, eps_max=1.6)
        assert bc.essential.sum() == 2
        np.testing.assert_allclose(sorted_bars(bc), [[0, 0.1], [0, 1.6], [0, 1.6]])

    def test_matches_oracle_examples(self, rng):
        for _ in range(20):
            pts = rng.uniform(size=(10, 3))
            ours, ref = h0_barcode(pts, 1.6), oracle_h0_persistence(pts, 1.6)
            np.testing.assert_allclose(sorted_bars(ours), sorted_bars(ref), atol=1e-12)

    def test_two_cluster_gap(self, rng):
        # the inter-cluster merge produces exactly one bar at the gap length
        a = rng.uniform(0, 0.1, size=(6, 3))
        b = a[:1] + np.array([1.0, 0, 0])
        pts = np.vstack([a, b])
        gap = np.min(np.linalg.norm(a - b, axis=1))
        ref = oracle_h0_persistence(pts, 1.6)
        finite = ref.deaths[~ref.essential]
        assert np.sum(np.isclose(finite, gap, atol=1e-12)) == 1

    def test_mst_weight_count(self, rng):
        pts = rng.normal(size=(30, 3))
        assert mst_edge_weights(pts).shape == (29,)

    @given(arrays(np.float64, st.tuples(st.integers(1, 25), st.just(3)),
                  elements=st.floats(-1, 1, allow_nan=False, width=32)))
    def test_bar_count_and_components(self, pts):
        bc = h0_barcode(pts, 1.6)
        assert len(bc) == len(pts)
        assert np.all(bc.births == 0)
        ref = oracle_h0_persistence(pts, 1.6)
        assert bc.essential.sum() == ref.essential.sum()


class TestFilter:
    def test_removes_short(self):
        out = filter_barcode(bars(0.5, 0.01), 0.1)
        np.testing.assert_array_equal(out.bars, [[0, 0.5]])

    def test_all_removed(self):
        assert len(filter_barcode(bars(0.01, 0.02), 0.1)) == 0

    def test_boundary_kept(self):
        assert len(filter_barcode(bars(0.1), 0.1)) == 1

    def test_order_preserved(self):
        out = filter_barcode(bars(0.9, 0.01, 0.3, 0.5), 0.2)
        np.testing.assert_array_equal(out.deaths, [0.9, 0.3, 0.5])


class TestDistances:
    def test_identical(self):
        b = bars(0.3, 1.0)
        assert bottleneck_distance(b, b) == 0.0
        assert wasserstein_distance(b, b) == 0.0

    def test_bottleneck_examples(self):
        assert bottleneck_distance(bars(1), bars(2)) == pytest.approx(1.0)
        assert bottleneck_distance(bars(2), bars()) == pytest.approx(1.0)
        assert bottleneck_distance(bars(), bars()) == 0.0

    def test_bottleneck_examples_match_oracle(self):
        assert oracle_matching_distance(bars(1), bars(2)) == pytest.approx(1.0)
        assert oracle_matching_distance(bars(2), bars()) == pytest.approx(1.0)

    def test_wasserstein_examples(self):
        assert wasserstein_distance(bars(1), bars(2), p=1) == pytest.approx(1.0)
        assert wasserstein_distance(bars(1, 2), bars(1, 4), p=1) == pytest.approx(1.0)
        assert oracle_matching_distance(bars(1, 2), bars(1, 4), p=1) == pytest.approx(1.0)
        assert wasserstein_distance(bars(), bars()) == 0.0

    def test_wasserstein_rejects_bad_p(self):
        with pytest.raises(ValueError):
            wasserstein_distance(bars(1), bars(2), p=0)

    def test_oracle_empty(self):
        assert oracle_matching_distance(bars(), bars()) == 0.0

    def test_oracle_size_guard(self):
        with pytest.raises(ValueError):
            oracle_matching_distance(bars(*range(1, 8)), bars(1))


class TestSimilarity:
    def test_classification(self):
        assert classify_similarity(0.0084, 0.02) == "high"
        assert classify_similarity(0.0561, 0.02) == "low"
        assert classify_similarity(0.02, 0.02) == "low"

    def test_identity(self, rng):
        pts = rng.uniform(size=(200, 3))
        res = topological_similarity(pts, pts)
        assert res.d_bottleneck == 0.0 and res.d_wasserstein == 0.0
        assert res.similarity == "high"

    def test_threshold_from_original(self, rng):
        po = rng.uniform(size=(100, 3))
        ps = po * 0.5
        res = topological_similarity(po, ps)
        assert res.eps_star == pytest.approx(nearest_neighbor_threshold(po))

    def test_bad_threshold(self, rng):
        pts = rng.uniform(size=(10, 3))
        with pytest.raises(ValueError):
            topological_similarity(pts, pts, d_threshold=2.0)

    def test_estimator(self, rng):
        po = rng.uniform(size=(80, 3))
        est = TopologicalSimilarity().fit(po)
        out = est.transform(po)
        assert out.shape == (1, 2) and np.all(out == 0)
        assert est.predict(po) == "high"


@given(st.lists(st.floats(0, 2), max_size=5), st.lists(st.floats(0, 2), max_size=5))
def test_distances_match_oracle(d1, d2):
    b1, b2 = bars(*d1), bars(*d2)
    assert math.isclose(bottleneck_distance(b1, b2), oracle_matching_distance(b1, b2), abs_tol=1e-12)
    for p in (1, 2):
        assert math.isclose(
            wasserstein_distance(b1, b2, p), oracle_matching_distance(b1, b2, p), abs_tol=1e-12
        )
