"""Input degradation for sensitivity studies: Gaussian noise and grid-averaged downsampling."""

import warnings

import numpy as np

from ._validation import check_points, check_positive_int
from .geometry import PointCloud, SkeletalPointSet, bounding_box_diagonal


def _rewrap(like, pts):
    if isinstance(like, SkeletalPointSet):
        return SkeletalPointSet(pts, like.correspondence)
    if isinstance(like, PointCloud):
        return PointCloud(pts)
    return pts


def degrade_noise(cloud, fraction=0.05, seed=0, reference_diagonal=None):
    """Add isotropic Gaussian noise with ``sigma = fraction * diagonal``.

    The diagonal is the cloud's own bounding-box diagonal unless
    ``reference_diagonal`` is given, e.g. the original cloud's when noising a
    skeletal set. Deterministic under ``seed``; ``fraction = 0`` returns an
    identical copy. Point order and any skeletal correspondence are kept.
    """
    if fraction < 0:
        raise ValueError(f"fraction must be non-negative, got {fraction}")
    pts = check_points(cloud)
    if fraction == 0:
        return _rewrap(cloud, pts.copy())
    diag = bounding_box_diagonal(pts) if reference_diagonal is None else float(reference_diagonal)
    sigma = fraction * diag
    rng = np.random.default_rng(seed)
    return _rewrap(cloud, pts + rng.normal(scale=sigma, size=pts.shape))


def voxel_average(points, size):
    """Replace the points in each occupied voxel of edge ``size`` by their centroid.

    Output order follows the lexicographic order of voxel indices.
    """
    pts = check_points(points)
    keys = np.floor((pts - pts.min(axis=0)) / size).astype(np.int64)
    _, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    sums = np.zeros((counts.size, 3))
    np.add.at(sums, inverse, pts)
    return sums / counts[:, None]


def degrade_downsample(cloud, target_n, tolerance=0.05, max_iter=60):
    """Grid-averaged downsampling to about ``target_n`` points.

    The voxel size is bisected until the output count is within
    ``tolerance * target_n`` of the target. If no voxel size gets there
    (e.g. too few distinct positions) the closest count found is returned
    with a warning.
    """
    pts = check_points(cloud)
    n = pts.shape[0]
    target_n = check_positive_int(target_n, "target_n")
    if target_n > n:
        raise ValueError(f"target_n ({target_n}) exceeds the number of points ({n})")
    if target_n == n:
        return _rewrap_cloud(cloud, pts.copy())
    slack = tolerance * target_n
    diag = bounding_box_diagonal(pts)
    if diag == 0.0:
        warnings.warn(f"all points coincide; returning 1 point instead of {target_n}", stacklevel=2)
        return _rewrap_cloud(cloud, pts[:1].copy())
    # count decreases (not strictly) as the voxel grows
    lo, hi = 0.0, 2.0 * diag
    best = voxel_average(pts, hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        out = voxel_average(pts, mid)
        if abs(out.shape[0] - target_n) < abs(best.shape[0] - target_n):
            best = out
        if abs(out.shape[0] - target_n) <= slack:
            break
        if out.shape[0] > target_n:
            lo = mid
        else:
            hi = mid
    if abs(best.shape[0] - target_n) > slack:
        warnings.warn(
            f"grid averaging could not reach {target_n} points; returning {best.shape[0]}",
            stacklevel=2,
        )
    return _rewrap_cloud(cloud, best)


def _rewrap_cloud(like, pts):
    # averaged points no longer correspond to originals one-to-one
    return PointCloud(pts) if isinstance(like, (PointCloud, SkeletalPointSet)) else pts
