"""H0 persistent homology of point clouds and barcode distances.

H0 of a Vietoris-Rips filtration depends only on its 1-skeleton: every point
is born at radius 0 and components die at the single-linkage merge radii,
i.e. at the edge weights of a Euclidean minimum spanning tree. Nothing above
dimension one is ever built.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator

from ._validation import check_points, check_positive_int
from .geometry import DEFAULT_DIAGONAL, PersistenceBarcode, SkeletalPointSet


def _distances_from(points, j):
    diff = points - points[j]
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def nearest_neighbor_threshold(points):
    """Largest nearest-neighbour distance over the cloud (the filtering threshold)."""
    pts = check_points(points, min_points=2)
    _, idx = cKDTree(pts).query(pts, k=2)
    # self is not guaranteed to be column 0 when duplicates exist
    nn = np.where(idx[:, 0] == np.arange(len(pts)), idx[:, 1], idx[:, 0])
    diff = pts - pts[nn]
    # same kernel as _distances_from so the threshold compares exactly with bar deaths
    return float(np.sqrt(np.einsum("ij,ij->i", diff, diff)).max())


def mst_edge_weights(points):
    """Edge weights of a Euclidean minimum spanning tree, in insertion order.

    Dense Prim's algorithm: O(n^2) time, O(n) memory.
    """
    pts = check_points(points)
    n = pts.shape[0]
    if n == 1:
        return np.empty(0)
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = _distances_from(pts, 0)
    best[0] = np.inf
    weights = np.empty(n - 1)
    for step in range(n - 1):
        j = int(np.argmin(best))
        weights[step] = best[j]
        in_tree[j] = True
        best[j] = np.inf
        d = _distances_from(pts, j)
        np.minimum(best, d, out=best, where=~in_tree)
    return weights


def h0_barcode(points, eps_max=DEFAULT_DIAGONAL):
    """H0 barcode of the Vietoris-Rips filtration, capped at ``eps_max``.

    One bar per point. Merges at radius above ``eps_max`` never happen inside
    the filtration, so those components stay essential; every essential bar
    has death ``eps_max``. Bars are sorted by death, essential bars last.
    """
    if not eps_max > 0:
        raise ValueError(f"eps_max must be positive, got {eps_max}")
    w = np.sort(mst_edge_weights(points))
    finite = w[w <= eps_max]
    n_essential = 1 + int(np.count_nonzero(w > eps_max))
    deaths = np.concatenate([finite, np.full(n_essential, float(eps_max))])
    bars = np.column_stack([np.zeros_like(deaths), deaths])
    essential = np.zeros(len(deaths), dtype=bool)
    essential[len(finite):] = True
    return PersistenceBarcode(bars, essential)


def _as_barcode(b):
    return b if isinstance(b, PersistenceBarcode) else PersistenceBarcode(b)


def filter_barcode(barcode, threshold):
    """Keep the bars with persistence >= ``threshold``, preserving order."""
    if threshold < 0:
        raise ValueError(f"threshold must be non-negative, got {threshold}")
    b = _as_barcode(barcode)
    keep = b.persistence >= threshold
    return PersistenceBarcode(b.bars[keep], b.essential[keep])


def _augmented_costs(b1, b2):
    """Cost matrix for matchings where any bar may also go to the diagonal.

    Rows are bars of ``b1`` then diagonal slots for ``b2``; columns are bars of
    ``b2`` then diagonal slots for ``b1``. A bar's diagonal cost is half its
    persistence (the L-infinity distance to its diagonal projection).
    """
    x, y = b1.bars, b2.bars
    n1, n2 = len(x), len(y)
    size = n1 + n2
    cost = np.full((size, size), np.inf)
    if n1 and n2:
        cost[:n1, :n2] = np.maximum(
            np.abs(x[:, None, 0] - y[None, :, 0]), np.abs(x[:, None, 1] - y[None, :, 1])
        )
    idx1, idx2 = np.arange(n1), np.arange(n2)
    cost[idx1, n2 + idx1] = 0.5 * (x[:, 1] - x[:, 0])
    cost[n1 + idx2, idx2] = 0.5 * (y[:, 1] - y[:, 0])
    cost[n1:, n2:] = 0.0
    return cost


def bottleneck_distance(b1, b2):
    """Bottleneck distance between barcodes under the L-infinity interval metric."""
    b1, b2 = _as_barcode(b1), _as_barcode(b2)
    if len(b1) + len(b2) == 0:
        return 0.0
    cost = _augmented_costs(b1, b2)
    size = cost.shape[0]
    candidates = np.unique(cost[np.isfinite(cost)])

    def perfect(threshold):
        rows, cols = np.nonzero(cost <= threshold)
        graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(size, size))
        match = maximum_bipartite_matching(graph, perm_type="column")
        return bool(np.all(match >= 0))

    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if perfect(candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def wasserstein_distance(b1, b2, p=1):
    """Normalized p-Wasserstein distance.

    ``(min-cost matching sum of d_inf^p)^(1/p)`` divided by the number of bars,
    taken as ``max(len(b1), len(b2))``.
    """
    check_positive_int(p, "p")
    b1, b2 = _as_barcode(b1), _as_barcode(b2)
    n_b = max(len(b1), len(b2))
    if n_b == 0:
        return 0.0
    cost = _augmented_costs(b1, b2) ** p
    rows, cols = linear_sum_assignment(cost)
    total = float(cost[rows, cols].sum())
    return total ** (1.0 / p) / n_b


@dataclass
class TopologyResult:
    d_bottleneck: float
    d_wasserstein: float
    similarity: str
    eps_star: float
    n_bars_original: int
    n_bars_skeletal: int
    n_b: int
    barcode_original: PersistenceBarcode
    barcode_skeletal: PersistenceBarcode

    @property
    def high_similarity(self):
        return self.similarity == "high"

    def summary(self):
        return {
            "d_bottleneck": self.d_bottleneck,
            "d_wasserstein": self.d_wasserstein,
            "similarity": self.similarity,
            "eps_star": self.eps_star,
            "bars_original": self.n_bars_original,
            "bars_skeletal": self.n_bars_skeletal,
            "n_b": self.n_b,
        }


def classify_similarity(distance, d_threshold):
    return "high" if distance < d_threshold else "low"


def topological_similarity(original, skeletal, d_threshold=0.02, eps_max=DEFAULT_DIAGONAL, p=1):
    """Compare the filtered H0 barcodes of the original and skeletal clouds.

    Both clouds are expected to share one normalization (diagonal ``eps_max``).
    The filter threshold comes from the original cloud only. Classification
    uses the bottleneck distance; both distances are returned.
    """
    if not 0 < d_threshold <= eps_max:
        raise ValueError(f"d_threshold must be in (0, eps_max], got {d_threshold}")
    po = check_points(original, name="original", min_points=2)
    ps = check_points(
        skeletal.points if isinstance(skeletal, SkeletalPointSet) else skeletal, name="skeletal"
    )
    eps_star = nearest_neighbor_threshold(po)
    bo = filter_barcode(h0_barcode(po, eps_max), eps_star)
    bs = filter_barcode(h0_barcode(ps, eps_max), eps_star)
    d_b = bottleneck_distance(bo, bs)
    d_w = wasserstein_distance(bo, bs, p)
    return TopologyResult(
        d_bottleneck=d_b,
        d_wasserstein=d_w,
        similarity=classify_similarity(d_b, d_threshold),
        eps_star=eps_star,
        n_bars_original=len(bo),
        n_bars_skeletal=len(bs),
        n_b=max(len(bo), len(bs)),
        barcode_original=bo,
        barcode_skeletal=bs,
    )


class TopologicalSimilarity(BaseEstimator):
    """Estimator wrapper: ``fit`` on the original cloud, ``transform`` skeletal clouds.

    Parameters
    ----------
    d_threshold : float
        Bottleneck distance below which similarity is "high".
    eps_max : float
        Filtration cap; the normalized bounding-box diagonal.
    p : int
        Wasserstein order.
    """

    def __init__(self, d_threshold=0.02, eps_max=DEFAULT_DIAGONAL, p=1):
        self.d_threshold = d_threshold
        self.eps_max = eps_max
        self.p = p

    def fit(self, X, y=None):
        X = check_points(X, min_points=2)
        self.eps_star_ = nearest_neighbor_threshold(X)
        self.barcode_ = filter_barcode(h0_barcode(X, self.eps_max), self.eps_star_)
        self.n_features_in_ = 3
        return self

    def _distances(self, X):
        bs = filter_barcode(h0_barcode(check_points(X), self.eps_max), self.eps_star_)
        return bottleneck_distance(self.barcode_, bs), wasserstein_distance(self.barcode_, bs, self.p)

    def transform(self, X):
        """Return ``[[d_bottleneck, d_wasserstein]]`` for one skeletal cloud."""
        return np.array([self._distances(X)])

    def predict(self, X):
        """Return ``"high"`` or ``"low"`` similarity for one skeletal cloud."""
        return classify_similarity(self._distances(X)[0], self.d_threshold)
