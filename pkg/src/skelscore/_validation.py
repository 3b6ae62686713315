"""Input validation helpers shared by the metric modules and estimators."""

import numbers

import numpy as np
from sklearn.utils import check_array


def check_points(X, *, name="points", min_points=1):
    """Validate a 3D point array and return it as a C-contiguous float64 (n, 3) array.

    Accepts anything array-like, including :class:`~skelscore.geometry.PointCloud`
    and :class:`~skelscore.geometry.SkeletalPointSet` (both expose ``__array__``).
    """
    arr = check_array(
        np.asarray(X, dtype=np.float64) if not isinstance(X, np.ndarray) else X,
        dtype=np.float64,
        ensure_all_finite=True,
        ensure_2d=True,
        ensure_min_samples=min_points,
        input_name=name,
    )
    if arr.shape[1] != 3:
        raise ValueError(f"{name} must have 3 columns, got shape {arr.shape}")
    return np.ascontiguousarray(arr)


def check_point(x, *, name="x"):
    arr = np.asarray(x, dtype=np.float64).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a single 3D point, got shape {np.shape(x)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinity")
    return arr


def check_edges(edges, n_vertices, *, name="edges"):
    """Validate an undirected edge list: in range, no self-loops, no duplicates."""
    arr = np.asarray(edges)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{name} must have shape (m, 2), got {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValueError(f"{name} must contain integer vertex indices")
    arr = arr.astype(np.int64)
    if arr.min() < 0 or arr.max() >= n_vertices:
        bad = arr[(arr < 0).any(axis=1) | (arr >= n_vertices).any(axis=1)][0]
        raise ValueError(f"{name} references vertex outside [0, {n_vertices}): {tuple(bad)}")
    loops = arr[:, 0] == arr[:, 1]
    if loops.any():
        raise ValueError(f"{name} contains a self-loop at vertex {arr[loops][0, 0]}")
    canon = np.sort(arr, axis=1)
    _, first, counts = np.unique(canon, axis=0, return_index=True, return_counts=True)
    if (counts > 1).any():
        dup = canon[first[counts > 1][0]]
        raise ValueError(f"{name} contains duplicate edge {tuple(dup)}")
    return arr


def check_positive_int(value, name, *, minimum=1):
    if not isinstance(value, numbers.Integral) or isinstance(value, bool):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_threshold(value, name, *, low=0.0, high=1.0):
    """Check ``low < value <= high``."""
    value = float(value)
    if not (low < value <= high):
        raise ValueError(f"{name} must be in ({low}, {high}], got {value}")
    return value
