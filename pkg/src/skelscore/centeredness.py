"""Centeredness of skeletal elements within the local cross-section of the shape.

Skeletal points are scored against the original points they were contracted
from. Curve-skeleton samples are scored against an ellipse fitted to the
slab of original points around them, cut perpendicular to the curve.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator

from ._validation import check_points, check_positive_int, check_threshold
from .boundedness import sample_curve_points
from .geometry import CurveSkeleton, SkeletalPointSet, bounding_box_diagonal
from .report import ElementScores
from .smoothness import pca_tangents

DEFAULT_ALPHA = 0.5


class UnfittableError(ValueError):
    """Too few or collinear points for an ellipse."""


# -- skeletal point sets ----------------------------------------------------


def skeletal_centeredness_scores(skeletal, original, k=8):
    """Per-point centeredness of a skeletal point set.

    For point ``i`` with ``k`` nearest skeletal neighbours ``j`` (itself
    included) and corresponding original points ``phi_j``::

        c = 1 - |sum phi_j - sum p_j| / sum |phi_j - mean p_j|

    Values are not clamped and can be negative. A vanishing denominator marks
    the point invalid.
    """
    if not isinstance(skeletal, SkeletalPointSet):
        skeletal = SkeletalPointSet(skeletal)
    orig = check_points(original, name="original")
    k = check_positive_int(k, "k", minimum=2)
    ps = skeletal.points
    n = ps.shape[0]
    phi = orig[skeletal.original_indices(orig.shape[0])]
    kk = min(k, n)
    _, idx = cKDTree(ps).query(ps, k=kk)
    idx = idx.reshape(n, kk)
    p_nb = ps[idx]
    phi_nb = phi[idx]
    num = np.linalg.norm(phi_nb.sum(axis=1) - p_nb.sum(axis=1), axis=1)
    den = np.linalg.norm(phi_nb - p_nb.mean(axis=1, keepdims=True), axis=2).sum(axis=1)
    scores = ElementScores.empty(n)
    ok = den >= 1e-12
    scores.values[ok] = 1.0 - num[ok] / den[ok]
    for i in np.flatnonzero(~ok):
        scores.invalidate(i, "degenerate neighborhood")
    return scores


def skeletal_point_centeredness(i, skeletal, original, k=8):
    """Centeredness of one skeletal point (NaN when its neighbourhood is degenerate)."""
    return float(skeletal_centeredness_scores(skeletal, original, k).values[i])


# -- cross-sections ---------------------------------------------------------


def curve_direction_at(skeleton, edge, t):
    """Unit direction of the curve at parameter ``t`` on edge ``edge = (a, b)``.

    Inside an edge it is the edge direction. At an endpoint of degree 2 it is
    the tangent of the circle through that vertex and its two neighbours,
    oriented along the path; at any other endpoint the edge direction is used.
    """
    a, b = (int(v) for v in skeleton.edges[edge])
    va, vb = skeleton.vertices[a], skeleton.vertices[b]
    d = vb - va
    length = np.linalg.norm(d)
    if length == 0.0:
        raise ValueError(f"edge {edge} has zero length")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must be in [0, 1], got {t}")
    if 0.0 < t < 1.0:
        return d / length
    prev, here = (a, b) if t == 1.0 else (b, a)
    others = [v for v in skeleton.neighbors(here) if v != prev]
    if len(others) != 1:
        return d / length
    u = circle_tangent(skeleton.vertices[prev], skeleton.vertices[here], skeleton.vertices[others[0]])
    # keep the edge's sense: at t = 0 the path was walked from b to a
    return u if t == 1.0 else -u


def circle_tangent(v0, v1, v2):
    """Tangent at ``v1`` of the circle through three points, pointing from ``v0`` towards ``v2``.

    Collinear points give the chord direction ``v2 - v0``.
    """
    v0, v1, v2 = (np.asarray(v, dtype=np.float64) for v in (v0, v1, v2))
    e0 = v0 - v1
    e2 = v2 - v1
    normal = np.cross(e0, e2)
    nn = np.dot(normal, normal)
    chord = v2 - v0
    if nn <= (1e-12 * np.dot(e0, e0) * np.dot(e2, e2)) or nn == 0.0:
        return chord / np.linalg.norm(chord)
    # circumcentre relative to v1
    rel = np.cross(np.dot(e0, e0) * e2 - np.dot(e2, e2) * e0, normal) / (2.0 * nn)
    tangent = np.cross(normal, -rel)
    tangent /= np.linalg.norm(tangent)
    return tangent if np.dot(tangent, chord) > 0 else -tangent


def slab_width(skeleton, alpha=DEFAULT_ALPHA):
    """``alpha`` times the shortest positive edge length."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    lengths = skeleton.edge_lengths()
    lengths = lengths[lengths > 0]
    if lengths.size == 0:
        raise ValueError("curve skeleton has no edge of positive length")
    return float(alpha * lengths.min())


def cross_section_basis(u):
    """Deterministic orthonormal ``(g, h)`` spanning the plane normal to ``u``."""
    u = np.asarray(u, dtype=np.float64)
    u = u / np.linalg.norm(u)
    axis = np.zeros(3)
    axis[np.argmin(np.abs(u))] = 1.0
    g = axis - np.dot(axis, u) * u
    g /= np.linalg.norm(g)
    h = np.cross(u, g)
    return g, h


def associated_points(original, p_g, u, eps):
    """Indices of original points within the slab ``|(q - p_g) . u| <= eps / 2``."""
    pts = np.asarray(original, dtype=np.float64)
    return np.flatnonzero(np.abs((pts - p_g) @ u) <= 0.5 * eps)


@dataclass
class Ellipse:
    center: np.ndarray
    semi_major: float
    semi_minor: float
    method: str  # "conic" or "circle"


def _circle_fit(xy):
    c = xy.mean(axis=0)
    r = float(np.linalg.norm(xy - c, axis=1).mean())
    return Ellipse(c, r, r, "circle")


def fit_ellipse(points2d):
    """Direct least-squares ellipse fit (numerically stable form).

    Five or more points get an algebraic conic fit constrained to ellipses;
    three or four points, or a fit that comes out non-elliptic, fall back to
    a circle (centroid and mean distance).

    Raises
    ------
    UnfittableError
        Fewer than three points, or all points on one line.
    """
    xy = np.asarray(points2d, dtype=np.float64).reshape(-1, 2)
    if xy.shape[0] < 3:
        raise UnfittableError(f"unfittable: need at least 3 points, got {xy.shape[0]}")
    mean = xy.mean(axis=0)
    z = xy - mean
    sv = np.linalg.svd(z, compute_uv=False)
    if sv[0] == 0.0 or sv[1] <= 1e-12 * sv[0]:
        raise UnfittableError("unfittable: points are collinear")
    if xy.shape[0] < 5:
        return _circle_fit(xy)
    scale = math.sqrt(float(np.mean(np.sum(z * z, axis=1))))
    x, y = z[:, 0] / scale, z[:, 1] / scale
    d1 = np.column_stack([x * x, x * y, y * y])
    d2 = np.column_stack([x, y, np.ones_like(x)])
    s1, s2, s3 = d1.T @ d1, d1.T @ d2, d2.T @ d2
    try:
        t = -np.linalg.solve(s3, s2.T)
    except np.linalg.LinAlgError:
        return _circle_fit(xy)
    m = s1 + s2 @ t
    # premultiply by the inverse of the ellipse constraint matrix
    m = np.array([m[2] / 2.0, -m[1], m[0] / 2.0])
    evals, evecs = np.linalg.eig(m)
    evals, evecs = evals.real, evecs.real
    cond = 4.0 * evecs[0] * evecs[2] - evecs[1] ** 2
    candidates = np.flatnonzero(cond > 0)
    if candidates.size == 0:
        return _circle_fit(xy)
    pick = candidates[np.argmin(np.abs(evals[candidates]))]
    a1 = evecs[:, pick]
    A, B, C = a1
    D, E, F = t @ a1
    det = 4.0 * A * C - B * B
    if det <= 0:
        return _circle_fit(xy)
    x0 = (B * E - 2.0 * C * D) / det
    y0 = (B * D - 2.0 * A * E) / det
    f0 = F + 0.5 * (D * x0 + E * y0)
    lam = np.linalg.eigvalsh(np.array([[A, B / 2.0], [B / 2.0, C]]))
    axes2 = -f0 / lam
    if not np.all(axes2 > 0):
        return _circle_fit(xy)
    axes = np.sqrt(axes2) * scale
    center = mean + scale * np.array([x0, y0])
    return Ellipse(center, float(axes.max()), float(axes.min()), "conic")


@dataclass
class CrossSection:
    """Slab of original points around a curve sample, projected onto the normal plane.

    ``planar`` holds the associated points in ``(g, h)`` coordinates with
    the sample at the origin.
    """

    sample: np.ndarray
    direction: np.ndarray
    eps: float
    basis: tuple
    indices: np.ndarray
    planar: np.ndarray
    ellipse: Ellipse = None

    @property
    def n_points(self):
        return self.indices.shape[0]


def cross_section(original, p_g, u, eps):
    """Build the cross-section at ``p_g`` normal to ``u`` and fit its ellipse if possible."""
    pts = np.asarray(original, dtype=np.float64)
    p_g = np.asarray(p_g, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    u = u / np.linalg.norm(u)
    idx = associated_points(pts, p_g, u, eps)
    g, h = cross_section_basis(u)
    rel = pts[idx] - p_g
    planar = np.column_stack([rel @ g, rel @ h])
    section = CrossSection(p_g, u, float(eps), (g, h), idx, planar)
    if idx.size >= 3:
        try:
            section.ellipse = fit_ellipse(planar)
        except UnfittableError:
            pass
    return section


def section_centeredness(section, p_g=None):
    """``max(0, 1 - |p - q_c| / mean semi-axis)`` for a point ``p`` in the section plane.

    ``p_g`` defaults to the section's own sample (the planar origin); any
    other point is projected onto the plane first. Returns ``(value, reason)``;
    value is NaN with a reason when undefined.
    """
    if section.n_points < 3:
        return math.nan, f"fewer than 3 associated points ({section.n_points})"
    if section.ellipse is None:
        return math.nan, "cross-section is unfittable"
    e = section.ellipse
    mean_axis = 0.5 * (e.semi_major + e.semi_minor)
    if not mean_axis > 0:
        return math.nan, "cross-section is unfittable"
    p_hat = np.zeros(2)
    if p_g is not None:
        rel = np.asarray(p_g, dtype=np.float64) - section.sample
        p_hat = np.array([rel @ section.basis[0], rel @ section.basis[1]])
    return max(0.0, 1.0 - float(np.linalg.norm(p_hat - e.center)) / mean_axis), None


def curve_point_centeredness(p_g, section):
    """Centeredness of ``p_g`` within ``section`` (NaN when undefined)."""
    return section_centeredness(section, p_g)[0]


def curve_centeredness_scores(skeleton, original, alpha=DEFAULT_ALPHA, n_samples=500, samples=None,
                              return_sections=False):
    """Centeredness of evenly spaced samples along a curve skeleton.

    Samples that coincide with a joint (degree > 2) vertex, or whose slab holds
    fewer than three points or cannot be fitted, are invalid.
    """
    if not isinstance(skeleton, CurveSkeleton):
        raise TypeError("skeleton must be a CurveSkeleton")
    orig = check_points(original, name="original")
    if samples is None:
        samples = sample_curve_points(skeleton, n_samples)
    eps = slab_width(skeleton, alpha)
    tol = 1e-9 * bounding_box_diagonal(orig)
    joints = skeleton.vertices[skeleton.degrees() > 2]
    scores = ElementScores.empty(len(samples))
    sections = []
    for i, (p, e, t) in enumerate(zip(samples.points, samples.edge, samples.t)):
        if joints.size and np.min(np.linalg.norm(joints - p, axis=1)) <= tol:
            scores.invalidate(i, "sample coincides with a joint vertex")
            sections.append(None)
            continue
        try:
            u = curve_direction_at(skeleton, e, t)
        except ValueError as exc:
            scores.invalidate(i, str(exc))
            sections.append(None)
            continue
        section = cross_section(orig, p, u, eps)
        value, reason = section_centeredness(section)
        if reason is None:
            scores.values[i] = value
        else:
            scores.invalidate(i, reason)
        sections.append(section)
    if return_sections:
        return scores, samples, sections
    return scores


def pca_slab_centeredness_scores(skeletal, original, k=8, alpha=DEFAULT_ALPHA):
    """Cross-section centeredness for thin skeletal point sets, using PCA tangents.

    The slab normal is the PCA tangent of each skeletal point and the slab
    width is ``alpha`` times the mean distance to the ``k``-th skeletal
    neighbour.
    """
    pts = check_points(skeletal.points if isinstance(skeletal, SkeletalPointSet) else skeletal)
    orig = check_points(original, name="original")
    tangents, valid = pca_tangents(pts, k)
    kk = min(k + 1, pts.shape[0])
    dist, _ = cKDTree(pts).query(pts, k=kk)
    eps = alpha * float(np.mean(np.asarray(dist).reshape(pts.shape[0], -1)[:, -1]))
    scores = ElementScores.empty(pts.shape[0])
    for i, p in enumerate(pts):
        if not valid[i]:
            scores.invalidate(i, "degenerate tangent")
            continue
        if not eps > 0:
            scores.invalidate(i, "zero slab width")
            continue
        value, reason = section_centeredness(cross_section(orig, p, tangents[i], eps))
        if reason is None:
            scores.values[i] = value
        else:
            scores.invalidate(i, reason)
    return scores


def overall_centeredness(scores, threshold=0.75):
    """Fraction of valid elements scoring strictly above ``threshold`` (NaN if none valid)."""
    check_threshold(threshold, "threshold")
    values = scores.values if isinstance(scores, ElementScores) else np.asarray(scores, dtype=float)
    values = values[~np.isnan(values)]
    if values.size == 0:
        return math.nan
    return float(np.mean(values > threshold))


class PointCenteredness(BaseEstimator):
    """Estimator wrapper: ``fit`` on the original cloud, score skeletal sets.

    ``transform`` accepts a :class:`SkeletalPointSet` (or an array with
    identity correspondence).
    """

    def __init__(self, k=8, threshold=0.75):
        self.k = k
        self.threshold = threshold

    def fit(self, X, y=None):
        self.original_ = check_points(np.asarray(X), name="original")
        self.n_features_in_ = 3
        return self

    def transform(self, skeletal):
        return skeletal_centeredness_scores(skeletal, self.original_, self.k).values[:, None]

    def score(self, skeletal, y=None):
        return overall_centeredness(self.transform(skeletal)[:, 0], self.threshold)


class CurveCenteredness(BaseEstimator):
    """Estimator wrapper for curve skeletons (inputs are :class:`CurveSkeleton`)."""

    def __init__(self, alpha=DEFAULT_ALPHA, n_samples=500, threshold=0.75):
        self.alpha = alpha
        self.n_samples = n_samples
        self.threshold = threshold

    def fit(self, X, y=None):
        self.original_ = check_points(np.asarray(X), name="original")
        self.n_features_in_ = 3
        return self

    def transform(self, skeleton):
        return curve_centeredness_scores(skeleton, self.original_, self.alpha, self.n_samples).values[:, None]

    def score(self, skeleton, y=None):
        return overall_centeredness(self.transform(skeleton)[:, 0], self.threshold)
