"""Boundedness: how much of the direction sphere around a query the cloud covers.

Each cloud point is seen from the query as a unit direction. The directions
are flattened with the sinusoidal (equal-area) projection, triangulated in
the plane, and the surviving triangles are measured back on the unit sphere.
A query inside a closed surface sees directions all around it (score near 1);
a query outside sees only a cone.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from sklearn.base import BaseEstimator

from ._delaunay import delaunay_with_halfedges, spherical_delaunay_flip
from ._kernels import nearest_neighbor_distances, pruned_spherical_areas
from ._parallel import map_ordered
from ._validation import check_point, check_points, check_positive_int, check_threshold
from .geometry import CurveSkeleton, SkeletalPointSet

FOUR_PI = 4.0 * np.pi
DEFAULT_PRUNING_FACTOR = 6.0
METHODS = ("sinusoidal", "sinusoidal-planar", "spherical")


class DegenerateQueryError(ValueError):
    """Every cloud point coincides with the query point."""


def project_to_unit_sphere(x, cloud):
    """Unit directions from ``x`` to every cloud point not coincident with it.

    Returns
    -------
    directions : ndarray of shape (m, 3)
    n_skipped : int
        Number of cloud points equal to ``x`` (they have no direction).
    """
    x = check_point(x)
    pts = check_points(cloud, name="cloud")
    d = pts - x
    norms = np.sqrt(np.einsum("ij,ij->i", d, d))
    ok = norms > 0
    if not ok.any():
        raise DegenerateQueryError("degenerate query: every cloud point coincides with the query")
    return d[ok] / norms[ok, None], int(np.count_nonzero(~ok))


def sinusoidal_project(directions):
    """Sinusoidal projection of unit vectors: ``(cos(lat) * lon, lat)``.

    Longitude is ``atan2(y, x)`` in (-pi, pi], latitude ``atan2(z, hypot(x, y))``.
    Accepts a single vector or an (n, 3) array.
    """
    d = np.asarray(directions, dtype=np.float64)
    single = d.ndim == 1
    d = np.atleast_2d(d)
    lon = np.arctan2(d[:, 1], d[:, 0])
    lat = np.arctan2(d[:, 2], np.hypot(d[:, 0], d[:, 1]))
    out = np.column_stack([np.cos(lat) * lon, lat])
    return out[0] if single else out


def _angle(a, b):
    return np.arccos(np.clip(np.einsum("ij,ij->i", a, b), -1.0, 1.0))


def spherical_triangle_areas(a, b, c):
    """Areas of unit-sphere triangles from their vertex arrays (l'Huilier)."""
    ea, eb, ec = _angle(b, c), _angle(a, c), _angle(a, b)
    s = 0.5 * (ea + eb + ec)
    t = np.tan(0.5 * s) * np.tan(0.5 * (s - ea)) * np.tan(0.5 * (s - eb)) * np.tan(0.5 * (s - ec))
    return 4.0 * np.arctan(np.sqrt(np.clip(t, 0.0, None)))


def _spaced_directions(d):
    """Drop exact repeats and return ``(directions, nn_angles)``.

    Repeats would give zero nearest-neighbour spacing, so they are removed
    (only when present).
    """
    chord = nearest_neighbor_distances(d)
    if np.any(chord == 0.0):
        _, first = np.unique(d, axis=0, return_index=True)
        d = d[np.sort(first)]
        chord = nearest_neighbor_distances(d)
        if d.shape[0] < 2:
            return d, np.zeros(d.shape[0])
    return d, 2.0 * np.arcsin(np.minimum(0.5 * chord, 1.0))


def _sinusoidal_triangles(d, nn, pruning_factor, refine=True):
    """Triangles (original indices) of the seam-aware sinusoidal triangulation.

    With ``refine`` the planar Delaunay mesh is edge-flipped until it is
    Delaunay on the sphere. The projection shears cells far from the central
    meridian and near the poles, where planar Delaunay links points across
    long great-circle distances; those sliver triangles would be pruned and
    leave false holes.

    Directions near longitude +-pi are copied one period over so triangles can
    span the seam. Of the duplicated triangles only the copy whose mean
    extended longitude lies in (-pi, pi] is kept, so each spherical region is
    counted once. The mean is weighted by cos(latitude): it then moves by
    exactly 2*pi between copies, and the arbitrary longitude of a pole has no
    say.
    """
    n = d.shape[0]
    lon = np.arctan2(d[:, 1], d[:, 0])
    lat = np.arctan2(d[:, 2], np.hypot(d[:, 0], d[:, 1]))
    coslat = np.cos(lat)
    # a kept triangle spans at most pruning_factor * max spacing on the sphere,
    # which at latitude lat corresponds to that angle / cos(lat) in longitude
    reach = pruning_factor * nn.max()
    # a band of pi already gives every point its one copy on the far side
    width = np.minimum(reach / np.maximum(coslat, 1e-12), np.pi)
    hi = np.nonzero(lon > np.pi - width)[0]
    lo = np.nonzero(lon < -np.pi + width)[0]
    idx = np.concatenate([np.arange(n), hi, lo])
    ext_lon = np.concatenate([lon, lon[hi] - 2.0 * np.pi, lon[lo] + 2.0 * np.pi])
    ext_lat = lat[idx]
    xy = np.column_stack([np.cos(ext_lat) * ext_lon, ext_lat])
    tri, halfedges = delaunay_with_halfedges(xy)
    if tri.shape[0] == 0:
        return tri
    if refine:
        spherical_delaunay_flip(tri, halfedges, d[idx])
    wsum = np.cos(ext_lat)[tri].sum(axis=1)
    mean_lon = xy[tri, 0].sum(axis=1) / np.maximum(wsum, 1e-300)
    tri = tri[(mean_lon > -np.pi) & (mean_lon <= np.pi)]
    t = idx[tri]
    return t[(t[:, 0] != t[:, 1]) & (t[:, 1] != t[:, 2]) & (t[:, 0] != t[:, 2])]


def _hull_triangles(d):
    try:
        return ConvexHull(d).simplices.astype(np.int64)
    except QhullError:
        return np.empty((0, 3), dtype=np.int64)


@dataclass
class SphereCoverage:
    """Direction-sphere coverage around one query point.

    ``triangles`` index into ``directions``; ``kept`` flags the triangles that
    survived pruning and make up ``area``.
    """

    query: np.ndarray
    directions: np.ndarray
    planar: np.ndarray
    triangles: np.ndarray
    kept: np.ndarray
    area: float
    n_skipped: int = 0
    notes: list = field(default_factory=list)

    @property
    def beta(self):
        return float(min(max(self.area / FOUR_PI, 0.0), 1.0))


def _coverage_triangles(d, nn, pruning_factor, method, spacing):
    if method in ("sinusoidal", "sinusoidal-planar"):
        tri = _sinusoidal_triangles(d, nn, pruning_factor, refine=method == "sinusoidal")
    elif method == "spherical":
        tri = _hull_triangles(d)
    else:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if tri.shape[0] == 0:
        return tri, np.zeros(0, dtype=bool), np.zeros(0)
    if spacing == "local":
        limit = pruning_factor * nn[tri].mean(axis=1)
    elif spacing == "median":
        limit = pruning_factor * np.median(nn)
    else:
        raise ValueError(f"spacing must be 'local' or 'median', got {spacing!r}")
    areas, kept = pruned_spherical_areas(d, tri, limit)
    return tri, kept, areas


def covered_area(directions, pruning_factor=DEFAULT_PRUNING_FACTOR, method="sinusoidal", spacing="local"):
    """Area of the unit sphere covered by the triangulated directions.

    Parameters
    ----------
    directions : array of shape (n, 3)
        Unit vectors.
    pruning_factor : float
        A triangle is discarded when its longest great-circle edge exceeds
        ``pruning_factor`` times the nearest-neighbour angular spacing
        (mean over its vertices for ``spacing="local"``, median over all
        directions for ``spacing="median"``). Large triangles bridge holes in
        coverage rather than sampled surface.
    method : {"sinusoidal", "sinusoidal-planar", "spherical"}
        Delaunay in sinusoidal coordinates refined by spherical edge flips;
        the same without refinement; or the convex hull of the directions
        (exact spherical Delaunay, slower).
    """
    d = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
    if d.shape[0] < 3:
        return 0.0
    d, nn = _spaced_directions(d)
    if d.shape[0] < 3:
        return 0.0
    _, _, areas = _coverage_triangles(d, nn, pruning_factor, method, spacing)
    return float(areas.sum())


def sphere_coverage(x, cloud, pruning_factor=DEFAULT_PRUNING_FACTOR, method="sinusoidal", spacing="local"):
    """Full coverage record for query ``x`` (see :class:`SphereCoverage`)."""
    d, skipped = project_to_unit_sphere(x, cloud)
    notes = [f"skipped {skipped} coincident point(s)"] if skipped else []
    if d.shape[0] >= 2:
        d, nn = _spaced_directions(d)
    if d.shape[0] < 3:
        tri, kept, areas = np.empty((0, 3), dtype=np.int64), np.zeros(0, dtype=bool), np.zeros(0)
    else:
        tri, kept, areas = _coverage_triangles(d, nn, pruning_factor, method, spacing)
    return SphereCoverage(
        query=check_point(x),
        directions=d,
        planar=sinusoidal_project(d),
        triangles=tri,
        kept=kept,
        area=float(areas.sum()),
        n_skipped=skipped,
        notes=notes,
    )


def boundedness_score(x, cloud, pruning_factor=DEFAULT_PRUNING_FACTOR, method="sinusoidal", spacing="local"):
    """Covered fraction of the direction sphere around ``x``, clamped to [0, 1]."""
    d, _ = project_to_unit_sphere(x, cloud)
    s = covered_area(d, pruning_factor, method, spacing)
    return float(min(max(s / FOUR_PI, 0.0), 1.0))


def is_bounded(beta, beta_threshold=0.75, rule="ge"):
    """Bounded test. ``rule="ge"`` means ``beta >= beta_threshold``; ``"lt"`` flips it."""
    check_threshold(beta_threshold, "beta_threshold")
    if rule == "ge":
        return bool(beta >= beta_threshold)
    if rule == "lt":
        return bool(beta < beta_threshold)
    raise ValueError(f"rule must be 'ge' or 'lt', got {rule!r}")


@dataclass
class CurveSamples:
    """Evenly spaced points on a curve skeleton with edge provenance.

    ``points[i] = (1 - t[i]) * v_a + t[i] * v_b`` for edge ``edges[edge[i]] = (a, b)``.
    """

    points: np.ndarray
    edge: np.ndarray
    t: np.ndarray

    def __len__(self):
        return self.points.shape[0]


def _apportion(lengths, n):
    """Largest-remainder split of ``n`` samples proportional to ``lengths``."""
    total = lengths.sum()
    quota = n * lengths / total
    counts = np.floor(quota).astype(np.int64)
    short = n - counts.sum()
    if short > 0:
        order = np.argsort(-(quota - counts), kind="stable")
        counts[order[:short]] += 1
    return counts


def sample_curve_points(skeleton, n_samples):
    """Sample about ``n_samples`` points on the skeleton, proportional to edge length.

    An edge with ``c >= 2`` samples gets ``t = linspace(0, 1, c)``, one sample
    lands at its midpoint, and a zero-length edge gets a single sample at its
    (coincident) vertices.
    """
    if not isinstance(skeleton, CurveSkeleton):
        raise TypeError("skeleton must be a CurveSkeleton")
    check_positive_int(n_samples, "n_samples", minimum=2)
    if skeleton.n_edges == 0:
        raise ValueError("curve skeleton has no edges to sample")
    lengths = skeleton.edge_lengths()
    counts = np.zeros(skeleton.n_edges, dtype=np.int64)
    positive = lengths > 0
    if positive.any():
        counts[positive] = _apportion(lengths[positive], n_samples)
    counts[~positive] = 1
    edge_ids, ts = [], []
    for e, cnt in enumerate(counts):
        if cnt == 0:
            continue
        t = np.array([0.5 if positive[e] else 0.0]) if cnt == 1 else np.linspace(0.0, 1.0, cnt)
        edge_ids.append(np.full(cnt, e, dtype=np.int64))
        ts.append(t)
    edge_ids = np.concatenate(edge_ids)
    ts = np.concatenate(ts)
    va = skeleton.vertices[skeleton.edges[edge_ids, 0]]
    vb = skeleton.vertices[skeleton.edges[edge_ids, 1]]
    pts = (1.0 - ts)[:, None] * va + ts[:, None] * vb
    return CurveSamples(points=pts, edge=edge_ids, t=ts)


def boundedness_scores(queries, cloud, pruning_factor=DEFAULT_PRUNING_FACTOR, method="sinusoidal", spacing="local"):
    """Per-query scores. Returns ``(beta, reasons)``; ``beta`` is NaN where undefined."""
    pts = check_points(cloud, name="cloud")
    q = check_points(queries, name="queries")

    def one(x):
        try:
            return boundedness_score(x, pts, pruning_factor, method, spacing), None
        except DegenerateQueryError as exc:
            return np.nan, str(exc)

    # repeated queries (common in contracted sets) are scored once
    uniq, inverse = np.unique(q, axis=0, return_inverse=True)
    out = map_ordered(one, uniq)
    inverse = inverse.reshape(-1)
    beta = np.array([b for b, _ in out])[inverse]
    return beta, [out[j][1] for j in inverse]


def _ratio_bounded(beta, beta_threshold, rule):
    valid = ~np.isnan(beta)
    if not valid.any():
        return np.nan
    flags = [is_bounded(b, beta_threshold, rule) for b in beta[valid]]
    return float(np.mean(flags))


def overall_boundedness_points(skeletal, original, beta_threshold=0.75, rule="ge", **kwargs):
    """Fraction of skeletal points that are bounded by the original cloud."""
    pts = skeletal.points if isinstance(skeletal, SkeletalPointSet) else skeletal
    pts = check_points(pts, name="skeletal")
    beta, _ = boundedness_scores(pts, original, **kwargs)
    return _ratio_bounded(beta, beta_threshold, rule)


def overall_boundedness_curve(skeleton, original, beta_threshold=0.75, n_samples=500, rule="ge", **kwargs):
    """Fraction of evenly spaced curve-skeleton samples that are bounded."""
    samples = sample_curve_points(skeleton, n_samples)
    beta, _ = boundedness_scores(samples.points, original, **kwargs)
    return _ratio_bounded(beta, beta_threshold, rule)


class Boundedness(BaseEstimator):
    """Estimator wrapper: ``fit`` stores the original cloud, queries are scored later.

    Parameters
    ----------
    beta_threshold : float
        Coverage fraction at which a query counts as bounded.
    pruning_factor : float
        Triangle pruning multiple of the local angular spacing.
    method : {"sinusoidal", "sinusoidal-planar", "spherical"}
    spacing : {"local", "median"}
    rule : {"ge", "lt"}
        Direction of the bounded test.
    """

    def __init__(self, beta_threshold=0.75, pruning_factor=DEFAULT_PRUNING_FACTOR,
                 method="sinusoidal", spacing="local", rule="ge"):
        self.beta_threshold = beta_threshold
        self.pruning_factor = pruning_factor
        self.method = method
        self.spacing = spacing
        self.rule = rule

    def fit(self, X, y=None):
        self.cloud_ = check_points(np.asarray(X), name="cloud")
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        """Coverage fraction per query, as a column."""
        beta, _ = boundedness_scores(
            np.asarray(X), self.cloud_, self.pruning_factor, self.method, self.spacing
        )
        return beta[:, None]

    def predict(self, X):
        beta = self.transform(X)[:, 0]
        return np.array([is_bounded(b, self.beta_threshold, self.rule) for b in beta])

    def score(self, X, y=None):
        """Fraction of bounded queries."""
        return _ratio_bounded(self.transform(X)[:, 0], self.beta_threshold, self.rule)


__all__ = [
    "Boundedness",
    "CurveSamples",
    "DegenerateQueryError",
    "SphereCoverage",
    "boundedness_score",
    "boundedness_scores",
    "covered_area",
    "is_bounded",
    "overall_boundedness_curve",
    "overall_boundedness_points",
    "project_to_unit_sphere",
    "sample_curve_points",
    "sinusoidal_project",
    "sphere_coverage",
    "spherical_triangle_areas",
]
