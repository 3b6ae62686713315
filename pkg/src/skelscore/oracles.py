"""Slow, independent reference implementations used to check the fast paths.

Each oracle avoids the numerical kernels of the code it checks: its own
distance computations (``math.dist``, explicit dot products), its own data
flow (boundary-matrix reduction, exhaustive matching, grid integration).
Size guards keep every call to a few seconds at most.
"""

import itertools
import math

import numpy as np

from .geometry import DEFAULT_DIAGONAL, PersistenceBarcode

MAX_ORACLE_POINTS = 30
MAX_ORACLE_BARS = 6


def oracle_h0_persistence(points, eps_max=DEFAULT_DIAGONAL):
    """H0 barcode by Z/2 reduction of the boundary matrix of the VR 1-skeleton.

    Edges enter in order of length (ties broken by vertex indices); an edge
    whose reduced column is non-zero merges two components and kills one
    bar at its length. Vertices never paired stay essential until
    ``eps_max``.
    """
    pts = [tuple(float(c) for c in p) for p in np.asarray(points, dtype=np.float64)]
    n = len(pts)
    if n == 0:
        raise ValueError("need at least one point")
    if n > MAX_ORACLE_POINTS:
        raise ValueError(f"oracle limited to {MAX_ORACLE_POINTS} points, got {n}")
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            length = math.dist(pts[i], pts[j])
            if length <= eps_max:
                edges.append((length, i, j))
    edges.sort()
    pivots = {}
    deaths = []
    for length, i, j in edges:
        column = {i, j}
        while column:
            low = max(column)
            if low not in pivots:
                pivots[low] = column
                deaths.append(length)
                break
            column = column ^ pivots[low]
    n_essential = n - len(deaths)
    bars = [(0.0, d) for d in sorted(deaths)] + [(0.0, float(eps_max))] * n_essential
    essential = [False] * len(deaths) + [True] * n_essential
    return PersistenceBarcode(np.array(bars).reshape(-1, 2), np.array(essential))


def _linf(a, b):
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def _matchings(n1, n2):
    """Every partial injection of range(n1) into range(n2) as a list of pairs."""
    for k in range(min(n1, n2) + 1):
        for left in itertools.combinations(range(n1), k):
            for right in itertools.permutations(range(n2), k):
                yield list(zip(left, right))


def oracle_matching_distance(b1, b2, p=math.inf):
    """Exact bottleneck (``p=inf``) or normalized p-Wasserstein distance.

    Enumerates every matching; unmatched bars pay half their persistence.
    The Wasserstein value is divided by ``max(len(b1), len(b2))``.
    """
    x = [tuple(map(float, bar)) for bar in np.asarray(getattr(b1, "bars", b1), dtype=float).reshape(-1, 2)]
    y = [tuple(map(float, bar)) for bar in np.asarray(getattr(b2, "bars", b2), dtype=float).reshape(-1, 2)]
    if max(len(x), len(y)) > MAX_ORACLE_BARS:
        raise ValueError(f"oracle limited to {MAX_ORACLE_BARS} bars per barcode")
    if not x and not y:
        return 0.0
    best = math.inf
    for pairs in _matchings(len(x), len(y)):
        used1 = {i for i, _ in pairs}
        used2 = {j for _, j in pairs}
        costs = [_linf(x[i], y[j]) for i, j in pairs]
        costs += [(x[i][1] - x[i][0]) / 2 for i in range(len(x)) if i not in used1]
        costs += [(y[j][1] - y[j][0]) / 2 for j in range(len(y)) if j not in used2]
        if p == math.inf:
            value = max(costs)
        else:
            value = sum(c**p for c in costs)
        best = min(best, value)
    if p == math.inf:
        return best
    return best ** (1.0 / p) / max(len(x), len(y))


def _latlong_grid(n_lat):
    """Cell-centre directions and exact cell areas of a lat-long grid."""
    n_lon = 2 * n_lat
    lat_edges = np.linspace(-np.pi / 2, np.pi / 2, n_lat + 1)
    lat = 0.5 * (lat_edges[:-1] + lat_edges[1:])
    lon = (np.arange(n_lon) + 0.5) * (2 * np.pi / n_lon) - np.pi
    band = (np.sin(lat_edges[1:]) - np.sin(lat_edges[:-1])) * (2 * np.pi / n_lon)
    la, lo = np.meshgrid(lat, lon, indexing="ij")
    dirs = np.stack([np.cos(la) * np.cos(lo), np.cos(la) * np.sin(lo), np.sin(la)], axis=-1)
    areas = np.repeat(band[:, None], n_lon, axis=1)
    return dirs.reshape(-1, 3), areas.reshape(-1)


def oracle_sphere_coverage(x, cloud, resolution=64, radius_factor=3.0):
    """Covered fraction of the direction sphere by lat-long grid integration.

    A cell counts as covered when its centre lies within ``radius_factor``
    times the nearest-neighbour angular spacing of the closest projected
    direction. Nearest neighbours are found by brute force.
    """
    if resolution < 64:
        raise ValueError("resolution must be at least 64")
    x = np.asarray(x, dtype=np.float64)
    diff = np.asarray(cloud, dtype=np.float64) - x
    norm = np.sqrt((diff * diff).sum(axis=1))
    diff = diff[norm > 0] / norm[norm > 0, None]
    dirs = np.unique(diff, axis=0)
    if len(dirs) < 3:
        return 0.0
    # nearest-neighbour angle of every direction, brute force in blocks
    spacing = np.empty(len(dirs))
    for s in range(0, len(dirs), 512):
        g = dirs[s:s + 512] @ dirs.T
        g[np.arange(g.shape[0]), np.arange(s, s + g.shape[0])] = -2.0
        spacing[s:s + 512] = np.arccos(np.clip(g.max(axis=1), -1.0, 1.0))
    cells, areas = _latlong_grid(resolution)
    covered = np.zeros(len(cells), dtype=bool)
    for s in range(0, len(cells), 1024):
        g = cells[s:s + 1024] @ dirs.T
        j = g.argmax(axis=1)
        ang = np.arccos(np.clip(g[np.arange(len(j)), j], -1.0, 1.0))
        covered[s:s + 1024] = ang <= radius_factor * spacing[j]
    return float(areas[covered].sum() / (4 * np.pi))
