"""Geometric data model: point clouds, skeletal point sets, curve skeletons, barcodes.

All containers are frozen and hold read-only numpy arrays, so they can be
shared between metric computations without copying.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_edges, check_points

DEFAULT_DIAGONAL = 1.6


def _frozen(arr):
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Ordered set of 3D points. Index order is significant and never changed."""

    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen(check_points(self.points)))

    def __len__(self):
        return self.points.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.points if dtype is None else self.points.astype(dtype)

    def transformed(self, transform):
        return PointCloud(transform.apply(self.points))


@dataclass(frozen=True, eq=False)
class SkeletalPointSet:
    """Contracted point set with an index map into the original cloud.

    ``correspondence[i]`` is the original-cloud index of skeletal point ``i``.
    ``None`` means identity, which requires equal cardinality with the
    original cloud (checked by :meth:`original_indices`).
    """

    points: np.ndarray
    correspondence: np.ndarray = None

    def __post_init__(self):
        pts = _frozen(check_points(self.points, name="skeletal points"))
        object.__setattr__(self, "points", pts)
        if self.correspondence is not None:
            corr = np.asarray(self.correspondence)
            if corr.shape != (pts.shape[0],):
                raise ValueError(
                    f"correspondence must have one entry per skeletal point "
                    f"({pts.shape[0]}), got shape {corr.shape}"
                )
            if not np.issubdtype(corr.dtype, np.integer):
                raise TypeError("correspondence must contain integer indices")
            object.__setattr__(self, "correspondence", _frozen(corr.astype(np.int64)))

    def __len__(self):
        return self.points.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.points if dtype is None else self.points.astype(dtype)

    def original_indices(self, n_original):
        """Return the total index map into an original cloud of ``n_original`` points."""
        n = self.points.shape[0]
        if self.correspondence is None:
            if n != n_original:
                raise ValueError(
                    f"identity correspondence needs equal sizes, got {n} skeletal "
                    f"vs {n_original} original points; pass an explicit correspondence"
                )
            return np.arange(n)
        corr = self.correspondence
        if n and (corr.min() < 0 or corr.max() >= n_original):
            raise ValueError(f"correspondence index out of range [0, {n_original})")
        return corr

    def transformed(self, transform):
        return SkeletalPointSet(transform.apply(self.points), self.correspondence)


@dataclass(frozen=True, eq=False)
class CurveSkeleton:
    """Undirected graph of 3D vertices; a vertex of degree > 2 is a joint."""

    vertices: np.ndarray
    edges: np.ndarray

    def __post_init__(self):
        verts = _frozen(check_points(self.vertices, name="vertices"))
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", _frozen(check_edges(self.edges, verts.shape[0])))

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_edges(self):
        return self.edges.shape[0]

    def degrees(self):
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    def neighbors(self, v):
        """Adjacent vertices of ``v`` in edge-list order."""
        e = self.edges
        out = []
        for a, b in e:
            if a == v:
                out.append(int(b))
            elif b == v:
                out.append(int(a))
        return out

    def adjacency(self):
        adj = [[] for _ in range(self.n_vertices)]
        for a, b in self.edges:
            adj[a].append(int(b))
            adj[b].append(int(a))
        return adj

    def edge_lengths(self):
        v = self.vertices
        return np.linalg.norm(v[self.edges[:, 1]] - v[self.edges[:, 0]], axis=1)

    def transformed(self, transform):
        return CurveSkeleton(transform.apply(self.vertices), self.edges)


@dataclass(frozen=True, eq=False)
class PersistenceBarcode:
    """H0 persistence intervals ``[birth, death)``.

    Essential bars (components still alive at the filtration cap) carry the
    cap as their death and are flagged in ``essential``.
    """

    bars: np.ndarray
    essential: np.ndarray = None

    def __post_init__(self):
        bars = np.asarray(self.bars, dtype=np.float64)
        if bars.size == 0:
            bars = bars.reshape(0, 2)
        if bars.ndim != 2 or bars.shape[1] != 2:
            raise ValueError(f"bars must have shape (k, 2), got {bars.shape}")
        if not np.all(np.isfinite(bars)):
            raise ValueError("bars must be finite; cap essential bars before building a barcode")
        if np.any(bars[:, 0] > bars[:, 1]):
            raise ValueError("every bar needs birth <= death")
        ess = (
            np.zeros(bars.shape[0], dtype=bool)
            if self.essential is None
            else np.asarray(self.essential, dtype=bool).reshape(-1)
        )
        if ess.shape[0] != bars.shape[0]:
            raise ValueError("essential flags must match the number of bars")
        object.__setattr__(self, "bars", _frozen(bars))
        object.__setattr__(self, "essential", _frozen(ess))

    def __len__(self):
        return self.bars.shape[0]

    @property
    def births(self):
        return self.bars[:, 0]

    @property
    def deaths(self):
        return self.bars[:, 1]

    @property
    def persistence(self):
        return self.bars[:, 1] - self.bars[:, 0]


@dataclass(frozen=True)
class Transform:
    """Uniform scale about ``center``: ``p -> center + scale * (p - center)``."""

    scale: float
    center: tuple = field(default=(0.0, 0.0, 0.0))

    def apply(self, points):
        pts = np.asarray(points, dtype=np.float64)
        c = np.asarray(self.center, dtype=np.float64)
        return c + self.scale * (pts - c)

    def inverse(self):
        return Transform(1.0 / self.scale, self.center)

    def to_dict(self):
        return {"scale": float(self.scale), "center": [float(c) for c in self.center]}


def bounding_box_diagonal(points):
    """Length of the axis-aligned bounding-box diagonal."""
    pts = check_points(points)
    return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))


def normalize_to_diagonal(cloud, target=DEFAULT_DIAGONAL):
    """Scale ``cloud`` about its bounding-box center so its diagonal equals ``target``.

    Returns the scaled cloud and the :class:`Transform` that produced it, so the
    same transform can be applied to a paired skeleton.
    """
    pts = check_points(cloud)
    if not target > 0:
        raise ValueError(f"target diagonal must be positive, got {target}")
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    diag = float(np.linalg.norm(hi - lo))
    if diag == 0.0:
        raise ValueError("cannot normalize a cloud with zero bounding-box diagonal")
    center = 0.5 * (lo + hi)
    tf = Transform(scale=target / diag, center=tuple(float(c) for c in center))
    out = PointCloud(tf.apply(pts)) if isinstance(cloud, PointCloud) else tf.apply(pts)
    return out, tf
