"""Quantitative evaluation of point-cloud skeletons.

Four metrics compare a skeleton with the cloud it was extracted from:
topological similarity of H0 persistence barcodes, boundedness (coverage of
the direction sphere), centeredness within local cross-sections, and
smoothness of tangents and turn angles. Skeletons are either contracted
point sets or curve graphs.
"""

__version__ = "0.1.0"

from .boundedness import Boundedness, boundedness_score, boundedness_scores, covered_area, sphere_coverage
from .centeredness import CurveCenteredness, PointCenteredness, curve_centeredness_scores, fit_ellipse
from .config import RunConfig
from .degrade import degrade_downsample, degrade_noise
from .evaluation import METRICS, evaluate
from .geometry import CurveSkeleton, PersistenceBarcode, PointCloud, SkeletalPointSet, normalize_to_diagonal
from .io import FormatError, load_curve_skeleton, load_point_cloud, save_curve_skeleton, save_point_cloud
from .report import ElementScores, EvaluationReport
from .smoothness import CurveSmoothness, PointSmoothness, overall_curve_smoothness, point_smoothness_scores
from .topology import (
    TopologicalSimilarity,
    bottleneck_distance,
    h0_barcode,
    topological_similarity,
    wasserstein_distance,
)

__all__ = [
    "Boundedness", "CurveCenteredness", "CurveSkeleton", "CurveSmoothness", "ElementScores",
    "EvaluationReport", "FormatError", "METRICS", "PersistenceBarcode", "PointCenteredness",
    "PointCloud", "PointSmoothness", "RunConfig", "SkeletalPointSet", "TopologicalSimilarity",
    "bottleneck_distance", "boundedness_score", "boundedness_scores", "covered_area",
    "curve_centeredness_scores", "degrade_downsample", "degrade_noise", "evaluate", "fit_ellipse",
    "h0_barcode", "load_curve_skeleton", "load_point_cloud", "normalize_to_diagonal",
    "overall_curve_smoothness", "point_smoothness_scores", "save_curve_skeleton", "save_point_cloud",
    "sphere_coverage", "topological_similarity", "wasserstein_distance",
]
