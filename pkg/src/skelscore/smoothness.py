"""Smoothness from tangent variation.

Skeletal point sets get PCA tangents and are scored by the worst angle to
nearby tangents. Curve skeletons are scored per degree-2 vertex by the turn
between its two edges, then averaged with half-edge length weights.
"""

import math
import warnings

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator

from ._validation import check_points, check_positive_int
from .geometry import CurveSkeleton, SkeletalPointSet
from .report import ElementScores

FOLD_WARNING_DEGREES = 135.0


class DegenerateTangentError(ValueError):
    """All neighbours coincide with the point, so no direction is defined."""


def _orient(v):
    # fix the arbitrary eigenvector sign: largest-magnitude component positive
    return -v if v[np.argmax(np.abs(v))] < 0 else v


def _without_self(idx):
    """Drop each row's own index from a ``k + 1`` neighbour query, keeping ``k`` columns.

    Under duplicate points the row's own index may be absent or not first.
    """
    n, kk = idx.shape
    own = idx == np.arange(n)[:, None]
    # rows without their own index lose the last (farthest) column instead
    own[~own.any(axis=1), -1] = True
    return idx[~own].reshape(n, kk - 1)


def pca_tangent(points, i, k=8, tree=None):
    """Dominant direction of the ``k`` nearest neighbours of point ``i`` (self excluded).

    The covariance is taken about the point itself,
    ``C = (1/k) sum (p_j - p_i)(p_j - p_i)^T``. The sign is made deterministic
    but carries no meaning.
    """
    pts = check_points(points)
    k = check_positive_int(k, "k", minimum=2)
    if pts.shape[0] < 2:
        raise DegenerateTangentError("degenerate tangent: no neighbours")
    tree = cKDTree(pts) if tree is None else tree
    kk = min(k + 1, pts.shape[0])
    _, idx = tree.query(pts[i], k=kk)
    idx = [j for j in np.atleast_1d(idx) if j != i][: kk - 1]
    diff = pts[idx] - pts[i]
    cov = diff.T @ diff / len(idx)
    if np.trace(cov) <= 1e-300:
        raise DegenerateTangentError("degenerate tangent: neighbours coincide with the point")
    _, vecs = np.linalg.eigh(cov)
    return _orient(vecs[:, -1])


def pca_tangents(points, k=8):
    """PCA tangent of every point. Returns ``(tangents, valid)``; invalid rows are NaN."""
    pts = check_points(points)
    k = check_positive_int(k, "k", minimum=2)
    n = pts.shape[0]
    tangents = np.full((n, 3), np.nan)
    valid = np.zeros(n, dtype=bool)
    if n < 2:
        return tangents, valid
    kk = min(k + 1, n)
    _, idx = cKDTree(pts).query(pts, k=kk)
    rows = np.arange(n)
    nbrs = _without_self(idx)
    diff = pts[nbrs] - pts[rows, None, :]
    cov = np.einsum("nki,nkj->nij", diff, diff) / (kk - 1)
    trace = np.trace(cov, axis1=1, axis2=2)
    _, vecs = np.linalg.eigh(cov)
    top = vecs[:, :, -1]
    flip = top[rows, np.argmax(np.abs(top), axis=1)] < 0
    top[flip] *= -1
    ok = trace > 1e-300
    tangents[ok] = top[ok]
    valid[ok] = True
    return tangents, valid


def direction_dissimilarity(t1, t2):
    """Angle between two vectors divided by pi, in [0, 1]."""
    a = np.asarray(t1, dtype=np.float64)
    b = np.asarray(t2, dtype=np.float64)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("direction dissimilarity needs non-zero vectors")
    cos = float(np.dot(a, b) / (na * nb))
    return math.acos(min(1.0, max(-1.0, cos))) / math.pi


def point_smoothness_scores(skeletal, k=8, m=5):
    """Per-point smoothness ``min_j |1 - 2 D_n(t_i, t_j)|`` over the ``m`` nearest neighbours."""
    pts = check_points(skeletal.points if isinstance(skeletal, SkeletalPointSet) else skeletal)
    m = check_positive_int(m, "m")
    n = pts.shape[0]
    scores = ElementScores.empty(n)
    tangents, valid = pca_tangents(pts, k)
    if n < 2:
        for i in range(n):
            scores.invalidate(i, "degenerate tangent")
        return scores
    mm = min(m + 1, n)
    _, idx = cKDTree(pts).query(pts, k=mm)
    for i in range(n):
        if not valid[i]:
            scores.invalidate(i, "degenerate tangent")
            continue
        nbrs = [j for j in idx[i] if j != i][: mm - 1]
        nbrs = [j for j in nbrs if valid[j]]
        if not nbrs:
            scores.invalidate(i, "no neighbour with a defined tangent")
            continue
        cos = np.clip(tangents[nbrs] @ tangents[i], -1.0, 1.0)
        dn = np.arccos(cos) / np.pi
        scores.values[i] = float(np.min(np.abs(1.0 - 2.0 * dn)))
    return scores


def overall_point_smoothness(skeletal, k=8, m=5):
    """Mean per-point smoothness over points with a defined score (NaN if none)."""
    return point_smoothness_scores(skeletal, k, m).mean()


def _turn_degrees(a, b):
    # turn angle of a path a -> v -> b is pi minus the angle between (a - v) and (b - v)
    return 180.0 - direction_dissimilarity(a, b) * 180.0


def vertex_smoothness(skeleton, v):
    """Smoothness at vertex ``v``: 1 unless degree 2, else ``|1 - 2 D_n(v_a - v, v_b - v)|``."""
    nbrs = skeleton.neighbors(v)
    if len(nbrs) != 2:
        return 1.0
    p = skeleton.vertices[v]
    a = skeleton.vertices[nbrs[0]] - p
    b = skeleton.vertices[nbrs[1]] - p
    return abs(1.0 - 2.0 * direction_dissimilarity(a, b))


def vertex_smoothness_scores(skeleton):
    """Per-vertex scores plus a list of fold-back warnings (turn above 135 degrees)."""
    if not isinstance(skeleton, CurveSkeleton):
        raise TypeError("skeleton must be a CurveSkeleton")
    scores = ElementScores.empty(skeleton.n_vertices)
    notes = []
    adj = skeleton.adjacency()
    verts = skeleton.vertices
    for v, nbrs in enumerate(adj):
        if len(nbrs) != 2:
            scores.values[v] = 1.0
            continue
        a = verts[nbrs[0]] - verts[v]
        b = verts[nbrs[1]] - verts[v]
        if not np.any(a) or not np.any(b):
            scores.invalidate(v, "zero-length incident edge")
            continue
        scores.values[v] = abs(1.0 - 2.0 * direction_dissimilarity(a, b))
        turn = _turn_degrees(a, b)
        if turn > FOLD_WARNING_DEGREES:
            notes.append(f"vertex {v} folds back (turn {turn:.1f} degrees) yet scores {scores.values[v]:.3f}")
    return scores, notes


def overall_curve_smoothness(skeleton, scores=None):
    """Length-weighted curve smoothness ``1 - sum w_i (1 - s_i) / W``.

    ``w_i`` is half the length of each edge at degree-2 vertex ``i``, summed;
    ``W`` is the total edge length. Vertices with an invalid score are left
    out of the sum.
    """
    if scores is None:
        scores, _ = vertex_smoothness_scores(skeleton)
    lengths = skeleton.edge_lengths()
    total = float(lengths.sum())
    if total == 0.0:
        raise ValueError("curve skeleton has zero total edge length")
    half = np.zeros(skeleton.n_vertices)
    np.add.at(half, skeleton.edges[:, 0], 0.5 * lengths)
    np.add.at(half, skeleton.edges[:, 1], 0.5 * lengths)
    deg2 = (skeleton.degrees() == 2) & scores.valid
    penalty = float(np.sum(half[deg2] * (1.0 - scores.values[deg2])))
    return 1.0 - penalty / total


class PointSmoothness(BaseEstimator):
    """Estimator wrapper: ``transform`` gives per-point smoothness, ``score`` the mean."""

    def __init__(self, k=8, m=5):
        self.k = k
        self.m = m

    def fit(self, X, y=None):
        check_points(X)
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        return point_smoothness_scores(np.asarray(X), self.k, self.m).values[:, None]

    def score(self, X, y=None):
        return overall_point_smoothness(np.asarray(X), self.k, self.m)


class CurveSmoothness(BaseEstimator):
    """Estimator wrapper for curve skeletons; inputs are :class:`CurveSkeleton` objects."""

    def fit(self, X=None, y=None):
        return self

    def transform(self, skeleton):
        scores, notes = vertex_smoothness_scores(skeleton)
        for note in notes:
            warnings.warn(note, stacklevel=2)
        return scores.values[:, None]

    def score(self, skeleton, y=None):
        return overall_curve_smoothness(skeleton)
