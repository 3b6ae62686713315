"""End-to-end evaluation of a skeleton against its original point cloud."""

import time

import numpy as np

from .boundedness import boundedness_scores, is_bounded, sample_curve_points
from .centeredness import (
    curve_centeredness_scores,
    overall_centeredness,
    pca_slab_centeredness_scores,
    skeletal_centeredness_scores,
)
from .config import RunConfig
from .geometry import CurveSkeleton, PointCloud, SkeletalPointSet, Transform, normalize_to_diagonal
from .report import ElementScores, EvaluationReport
from .smoothness import overall_curve_smoothness, point_smoothness_scores, vertex_smoothness_scores
from .topology import topological_similarity


def _as_cloud(original):
    return original if isinstance(original, PointCloud) else PointCloud(original)


def _as_skeletal(skeletal):
    if skeletal is None or isinstance(skeletal, SkeletalPointSet):
        return skeletal
    return SkeletalPointSet(skeletal)


def _bounded_ratio(beta, config):
    valid = ~np.isnan(beta)
    if not valid.any():
        return float("nan")
    return float(np.mean([is_bounded(b, config.beta_threshold, config.bounded_rule) for b in beta[valid]]))


def _beta_scores(queries, cloud, config):
    beta, reasons = boundedness_scores(
        queries, cloud, config.pruning_factor, config.coverage_method, config.coverage_spacing
    )
    return ElementScores(beta, reasons)


class _Run:
    """Collects overall values, element records, warnings and timings."""

    def __init__(self, report):
        self.report = report

    def metric(self, name, kind, func):
        start = time.perf_counter()
        try:
            return func()
        except (ValueError, TypeError, np.linalg.LinAlgError) as exc:
            self.report.warnings.append(f"{name} ({kind}) failed: {exc}")
            self.report.overall.setdefault(name, {})[kind] = None
            return None
        finally:
            key = f"{name}:{kind}"
            self.report.timings[key] = self.report.timings.get(key, 0.0) + time.perf_counter() - start

    def put(self, name, kind, value, scores=None, prefix=None):
        self.report.overall.setdefault(name, {})[kind] = value
        if scores is not None:
            self.report.add_scores(name, kind, prefix, scores)
            self.report.overall[name][f"{kind}_valid"] = int(np.count_nonzero(scores.valid))


METRICS = ("topology", "boundedness", "centeredness", "smoothness")


def evaluate(original, skeletal=None, curve=None, config=None, metrics=METRICS):
    """Evaluate a skeletal point set and/or a curve skeleton.

    Parameters
    ----------
    original : PointCloud or array of shape (n, 3)
    skeletal : SkeletalPointSet or array, optional
        Contracted points; an array implies identity correspondence.
    curve : CurveSkeleton, optional
    config : RunConfig, optional
    metrics : sequence of str
        Subset of ``METRICS`` to run.

    Returns
    -------
    EvaluationReport
        Topological similarity needs the skeletal set; boundedness,
        centeredness and smoothness run for each skeleton kind given. A
        metric that fails is recorded as a warning with a null value.
    """
    config = RunConfig() if config is None else config
    cloud = _as_cloud(original)
    skeletal = _as_skeletal(skeletal)
    if skeletal is None and curve is None:
        raise ValueError("nothing to evaluate: pass a skeletal point set, a curve skeleton, or both")
    if curve is not None and not isinstance(curve, CurveSkeleton):
        raise TypeError("curve must be a CurveSkeleton")
    unknown = sorted(set(metrics) - set(METRICS))
    if unknown:
        raise ValueError(f"unknown metric(s) {', '.join(unknown)}; choose from {', '.join(METRICS)}")

    if config.normalize:
        cloud, tf = normalize_to_diagonal(cloud, config.target_diagonal)
        skeletal = skeletal.transformed(tf) if skeletal is not None else None
        curve = curve.transformed(tf) if curve is not None else None
        normalization = {"applied": True, **tf.to_dict()}
    else:
        normalization = {"applied": False, **Transform(1.0).to_dict()}

    report = EvaluationReport(config=config.to_dict(), normalization=normalization)
    run = _Run(report)
    pts = cloud.points

    if skeletal is not None and "topology" in metrics:
        topo = run.metric("topology", "points", lambda: topological_similarity(
            pts, skeletal.points, config.d_threshold, config.target_diagonal, config.p))
        if topo is not None:
            report.overall["topology"] = topo.summary()
            report.artifacts["barcodes"] = (topo.barcode_original, topo.barcode_skeletal)

    if skeletal is not None and "boundedness" in metrics:
        beta = run.metric("boundedness", "points", lambda: _beta_scores(skeletal.points, pts, config))
        if beta is not None:
            run.put("boundedness", "points", _bounded_ratio(beta.values, config), beta, "point")

    if skeletal is not None and "centeredness" in metrics:
        def point_centers():
            if config.point_centeredness == "pca-slab":
                return pca_slab_centeredness_scores(skeletal, pts, config.k, config.alpha)
            return skeletal_centeredness_scores(skeletal, pts, config.k)

        cen = run.metric("centeredness", "points", point_centers)
        if cen is not None:
            run.put("centeredness", "points", overall_centeredness(cen, config.c_threshold), cen, "point")

    if skeletal is not None and "smoothness" in metrics:
        smo = run.metric("smoothness", "points", lambda: point_smoothness_scores(skeletal, config.k, config.m))
        if smo is not None:
            run.put("smoothness", "points", smo.mean(), smo, "point")

    needs_samples = curve is not None and ("boundedness" in metrics or "centeredness" in metrics)
    samples = None
    if needs_samples:
        samples = run.metric("sampling", "curve", lambda: sample_curve_points(curve, config.n_samples))
        if samples is not None:
            report.curve_samples = [
                {"sample": i, "edge": int(e), "t": float(t), "position": p.tolist()}
                for i, (p, e, t) in enumerate(zip(samples.points, samples.edge, samples.t))
            ]
        else:
            sampling = report.overall.pop("sampling")
            for name in ("boundedness", "centeredness"):
                if name in metrics:
                    report.overall.setdefault(name, {}).update(sampling)
    if samples is not None and "boundedness" in metrics:
        beta = run.metric("boundedness", "curve", lambda: _beta_scores(samples.points, pts, config))
        if beta is not None:
            run.put("boundedness", "curve", _bounded_ratio(beta.values, config), beta, "sample")
    if samples is not None and "centeredness" in metrics:
        res = run.metric("centeredness", "curve", lambda: curve_centeredness_scores(
            curve, pts, config.alpha, samples=samples, return_sections=True))
        if res is not None:
            cen, _, sections = res
            report.artifacts["sections"] = sections
            run.put("centeredness", "curve", overall_centeredness(cen, config.curve_c_threshold), cen, "sample")

    if curve is not None and "smoothness" in metrics:
        def curve_smoothness():
            scores, notes = vertex_smoothness_scores(curve)
            report.warnings.extend(notes)
            return scores, overall_curve_smoothness(curve, scores)

        smo = run.metric("smoothness", "curve", curve_smoothness)
        if smo is not None:
            run.put("smoothness", "curve", smo[1], smo[0], "vertex")

    return report
