"""Acceptance suite: one PASS/FAIL line per criterion, printed at its tolerance.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even
under output capture) or directly with ``python tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from skelscore.boundedness import boundedness_score, covered_area, project_to_unit_sphere
from skelscore.centeredness import curve_centeredness_scores
from skelscore.config import RunConfig
from skelscore.degrade import degrade_downsample, degrade_noise
from skelscore.evaluation import METRICS, evaluate
from skelscore.geometry import CurveSkeleton, PersistenceBarcode, normalize_to_diagonal
from skelscore.oracles import oracle_h0_persistence, oracle_matching_distance, oracle_sphere_coverage
from skelscore.smoothness import overall_curve_smoothness, vertex_smoothness
from skelscore.synth import contract, fibonacci_sphere, generate, polyline
from skelscore.topology import bottleneck_distance, h0_barcode, topological_similarity, wasserstein_distance

@pytest.fixture
def verdict(capsys):
    def report(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] #{number} {title}: {detail}")
        return ok

    return report


def random_barcode(rng, max_bars=5):
    k = int(rng.integers(0, max_bars + 1))
    births = rng.uniform(0, 1, k)
    return PersistenceBarcode(np.column_stack([births, births + rng.uniform(0, 1, k)]))


def distance(b1, b2, p):
    return bottleneck_distance(b1, b2) if p == math.inf else wasserstein_distance(b1, b2, p)


def test_1_h0_oracle(verdict):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        pts = rng.uniform(-1, 1, (int(rng.integers(5, 26)), 3))
        ours, ref = h0_barcode(pts), oracle_h0_persistence(pts)
        assert len(ours) == len(ref)
        assert np.array_equal(ours.essential, ref.essential)
        worst = max(worst, float(np.max(np.abs(ours.bars - ref.bars))))
    elapsed = time.perf_counter() - start
    ok = verdict(1, "H0 barcode vs boundary-matrix oracle", worst <= 1e-12 and elapsed < 10,
                 f"200 clouds, max |diff| {worst:.1e} (tol 1e-12), {elapsed:.2f} s (limit 10 s)")
    assert ok


def test_2_distance_oracle(verdict):
    rng = np.random.default_rng(2)
    worst = {math.inf: 0.0, 1: 0.0, 2: 0.0}
    for _ in range(500):
        b1, b2 = random_barcode(rng), random_barcode(rng)
        for p in worst:
            worst[p] = max(worst[p], abs(distance(b1, b2, p) - oracle_matching_distance(b1, b2, p)))
    ok = all(v <= 1e-12 for v in worst.values())
    detail = ", ".join(f"{'bottleneck' if p == math.inf else f'W{p}'} {v:.1e}" for p, v in worst.items())
    assert verdict(2, "distances vs exhaustive matching", ok, f"500 pairs, max |diff| {detail} (tol 1e-12)")


def axiom_violations(dist, seed=3):
    rng = np.random.default_rng(seed)
    worst_self = worst_sym = worst_tri = 0.0
    for _ in range(200):
        a, b, c = (random_barcode(rng) for _ in range(3))
        for p in (math.inf, 1, 2):
            worst_self = max(worst_self, dist(a, a, p))
            worst_sym = max(worst_sym, abs(dist(a, b, p) - dist(b, a, p)))
            worst_tri = max(worst_tri, dist(a, c, p) - dist(a, b, p) - dist(b, c, p))
    return worst_self, worst_sym, max(worst_tri, 0.0)


@pytest.mark.xfail(strict=True, reason="dividing by n_b = max bar count breaks the triangle inequality")
def test_3_metric_axioms(verdict):
    worst = axiom_violations(distance)
    ok = max(worst) <= 1e-9
    verdict(3, "metric axioms", ok,
            "200 triples, bottleneck and normalized W1, W2: max d(B,B) {:.1e}, asymmetry {:.1e}, "
            "triangle excess {:.1e} (tol 1e-9)".format(*worst))
    assert ok


def test_3_unnormalized_metric_axioms(verdict):
    def raw(b1, b2, p):
        return distance(b1, b2, p) * (1 if p == math.inf else max(len(b1), len(b2), 1))

    worst = axiom_violations(raw)
    assert verdict(3, "metric axioms without the n_b normalization", max(worst) <= 1e-9,
                   "200 triples, bottleneck and raw W1, W2: max d(B,B) {:.1e}, asymmetry {:.1e}, "
                   "triangle excess {:.1e} (tol 1e-9)".format(*worst))


def test_4_boundedness_calibration(verdict):
    start = time.perf_counter()
    sphere = fibonacci_sphere(4096)
    centre = boundedness_score([0, 0, 0], sphere)
    outside = boundedness_score([2, 0, 0], sphere)
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(50):
        # queries at least 0.2 R from the surface, inside and outside
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        r = rng.uniform(0, 0.8) if rng.random() < 0.5 else rng.uniform(1.2, 2.5)
        q = r * d
        ours = covered_area(project_to_unit_sphere(q, sphere)[0]) / (4 * math.pi)
        worst = max(worst, abs(ours - oracle_sphere_coverage(q, sphere)))
    elapsed = time.perf_counter() - start
    ok = centre >= 0.99 and outside <= 0.10 and worst <= 0.05 and elapsed < 30
    assert verdict(4, "boundedness calibration", ok,
                   f"centroid beta {centre:.4f} (>= 0.99), 2R beta {outside:.4f} (<= 0.10, cone 0.0670), "
                   f"oracle max |diff| {worst:.4f} over 50 queries (tol 0.05), {elapsed:.1f} s (limit 30 s)")


def test_5_centeredness_calibration(verdict):
    shape = generate("cylinder", n=4096, seed=5, radius=0.1, length=1.0)
    cloud = shape.cloud.points

    def interior(curve):
        scores, samples, _ = curve_centeredness_scores(curve, cloud, n_samples=500, return_sections=True)
        z = samples.points[:, 2]
        return scores.values, np.abs(z) <= 0.4

    values, inner = interior(shape.curve)
    inner_min = float(np.nanmin(values[inner]))
    overall = float(np.mean(values[~np.isnan(values)] >= 0.75))
    offsets = {}
    for delta in (0.2, 0.4, 0.6):
        moved = CurveSkeleton(shape.curve.vertices + [delta * 0.1, 0, 0], shape.curve.edges)
        v, m = interior(moved)
        offsets[delta] = float(np.nanmean(v[m]))
    ok = inner_min >= 0.95 and overall >= 0.9 and all(abs(c - (1 - d)) <= 0.1 for d, c in offsets.items())
    detail = ", ".join(f"delta {d}: {c:.3f}" for d, c in offsets.items())
    assert verdict(5, "centeredness calibration", ok,
                   f"interior min c {inner_min:.4f} (>= 0.95), overall C {overall:.4f} (>= 0.9), "
                   f"offsets {detail} (1 - delta +/- 0.1)")


def turn(angle_deg):
    a = math.radians(angle_deg)
    return CurveSkeleton([[-1, 0, 0], [0, 0, 0], [math.cos(a), math.sin(a), 0]], [[0, 1], [1, 2]])


def test_6_smoothness_exactness(verdict):
    straight = overall_curve_smoothness(polyline([[0, 0, 0], [3, 0, 0]], 3))
    right = overall_curve_smoothness(polyline([[0, 0, 0], [1, 0, 0], [1, 1, 0]]))
    expected = {0: 1.0, 30: 2 / 3, 60: 1 / 3, 90: 0.0}
    table = {a: vertex_smoothness(turn(a), 1) for a in expected}
    worst = max(abs(table[a] - expected[a]) for a in expected)
    ok = abs(straight - 1) <= 1e-12 and abs(right - 0.5) <= 1e-9 and worst <= 1e-12
    assert verdict(6, "smoothness exactness", ok,
                   f"straight S {straight!r}, right angle S {right!r} (0.5 +/- 1e-9), "
                   f"turn table max |diff| {worst:.1e} (tol 1e-12)")


def flat_overall(report):
    return {(m, k): v for m, d in report.overall.items() for k, v in d.items() if isinstance(v, float)}


@pytest.fixture(scope="module")
def invariance_case():
    shape = generate("dumbbell", n=1024, seed=7)
    return shape.cloud.points, contract(shape.cloud.points, shape.curve, 0.9).points, shape.curve


@pytest.mark.xfail(strict=True, reason="bounding-box normalization and the sphere projection are not rotation invariant")
def test_7_rigid_invariance(verdict, invariance_case):
    cloud, sk, curve = invariance_case
    cfg = RunConfig(n_samples=100)
    rot, shift = Rotation.from_euler("xyz", [0.4, -1.1, 2.0]), np.array([3.0, -1.0, 2.0])
    moved_curve = CurveSkeleton(rot.apply(curve.vertices) + shift, curve.edges)
    a = flat_overall(evaluate(cloud, sk, curve, cfg))
    b = flat_overall(evaluate(rot.apply(cloud) + shift, rot.apply(sk) + shift, moved_curve, cfg))
    diffs = {key: abs(a[key] - b[key]) for key in a}
    worst = max(diffs, key=diffs.get)
    ok = diffs[worst] < 1e-6
    verdict(7, "rigid-motion invariance", ok,
            f"max overall change {diffs[worst]:.2e} at {worst[0]}:{worst[1]} (tol 1e-6)")
    assert ok


def test_7_scaling_invariance(verdict, invariance_case):
    cloud, sk, _ = invariance_case
    base = topological_similarity(*_joint(cloud, sk))
    worst = 0.0
    for s in (0.01, 3.7, 250.0):
        res = topological_similarity(*_joint(cloud * s + 5.0, sk * s + 5.0))
        worst = max(worst, abs(res.d_bottleneck - base.d_bottleneck), abs(res.d_wasserstein - base.d_wasserstein))
    assert verdict(7, "scaling invariance after re-normalization", worst < 1e-6,
                   f"max topological distance change {worst:.2e} over scales 0.01, 3.7, 250 (tol 1e-6)")


def _joint(cloud, sk):
    norm, tf = normalize_to_diagonal(cloud)
    return norm, tf.apply(sk)


def test_8_sensitivity(verdict):
    noise_wins = sparse_wins = 0
    for seed in range(20):
        shape = generate("dumbbell", n=4096, seed=seed)
        cloud, tf = normalize_to_diagonal(shape.cloud)
        curve = shape.curve.transformed(tf)
        sk = contract(cloud.points, curve, 0.95)
        base = topological_similarity(cloud.points, sk.points)
        noisy = topological_similarity(cloud.points, degrade_noise(sk, 0.05, seed, reference_diagonal=1.6).points)
        noise_wins += noisy.d_bottleneck > base.d_bottleneck and noisy.d_wasserstein > base.d_wasserstein
        sparse, tf2 = normalize_to_diagonal(degrade_downsample(cloud, 1024))
        thin = topological_similarity(sparse.points, contract(sparse.points, curve.transformed(tf2), 0.95).points)
        sparse_wins += thin.eps_star > base.eps_star and (
            thin.d_bottleneck > base.d_bottleneck or thin.d_wasserstein > base.d_wasserstein)
    ok = noise_wins >= 18 and sparse_wins >= 18
    assert verdict(8, "sensitivity trend", ok,
                   f"noise raises d_B and d_W in {noise_wins}/20, downsampling raises eps* and a distance "
                   f"in {sparse_wins}/20 (need >= 18/20 each)")


def test_9_identity_skeleton(verdict):
    shape = generate("dumbbell", n=1024, seed=9)
    report = evaluate(shape.cloud, shape.cloud.points, config=RunConfig(n_samples=50))
    topo = report.overall["topology"]
    complete = set(report.overall) == set(METRICS) and all(
        report.overall[m].get("points") is not None for m in METRICS if m != "topology")
    ok = topo["d_bottleneck"] == 0.0 and topo["d_wasserstein"] == 0.0 and complete
    assert verdict(9, "identity skeleton", ok,
                   f"d_B {topo['d_bottleneck']!r}, d_W {topo['d_wasserstein']!r} (exactly 0), "
                   f"all four metrics reported: {complete}")


def test_10_performance(verdict):
    shape = generate("dumbbell", n=4096, seed=10)
    sk = contract(shape.cloud.points, shape.curve, 0.9)
    start = time.perf_counter()
    report = evaluate(shape.cloud, sk)
    elapsed = time.perf_counter() - start
    total = sum(report.timings.values())
    split = ", ".join(f"{k.split(':')[0]} {100 * v / total:.0f}%" for k, v in report.timings.items())
    assert verdict(10, "performance envelope", elapsed < 60,
                   f"4096 + 4096 four-metric run in {elapsed:.1f} s (limit 60 s); split {split}")


def test_11_determinism(verdict):
    shape = generate("L-polyline", n=1024, seed=11)
    sk = contract(shape.cloud.points, shape.curve, 0.9)
    cfg = RunConfig(n_samples=60, seed=11)
    first = evaluate(shape.cloud, sk, shape.curve, cfg).to_json()
    second = evaluate(shape.cloud, sk, shape.curve, cfg).to_json()
    assert verdict(11, "determinism", first.encode() == second.encode(),
                   f"two runs, {len(first.encode())} bytes each, byte-identical: {first == second}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-p", "no:cacheprovider"]))
