"""Compiled kernels for the per-query boundedness loop.

The coverage of one query is cheap, but a full evaluation runs thousands of
them, so the two hot spots (nearest-neighbour spacing of the projected
directions and triangle pruning with spherical areas) are compiled.
"""

import math

import numba
import numpy as np


@numba.njit(cache=True)
def _nn_chord(points):
    """Euclidean distance from each point to its nearest other point (uniform grid)."""
    n = points.shape[0]
    out = np.full(n, np.inf)
    if n < 2:
        return out
    lo = np.empty(3)
    hi = np.empty(3)
    for k in range(3):
        lo[k] = points[:, k].min()
        hi[k] = points[:, k].max()
    ext = max(hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2])
    if ext == 0.0:
        out[:] = 0.0
        return out
    # cell edge near the mean spacing of about n points spread over a surface
    h = ext / max(1.0, math.sqrt(n / 4.0))
    dims = np.empty(3, dtype=np.int64)
    for k in range(3):
        dims[k] = int((hi[k] - lo[k]) / h) + 1
    n_cells = dims[0] * dims[1] * dims[2]
    cell = np.empty(n, dtype=np.int64)
    ci = np.empty((n, 3), dtype=np.int64)
    for i in range(n):
        for k in range(3):
            c = int((points[i, k] - lo[k]) / h)
            ci[i, k] = min(c, dims[k] - 1)
        cell[i] = (ci[i, 0] * dims[1] + ci[i, 1]) * dims[2] + ci[i, 2]
    order = np.argsort(cell)
    start = np.full(n_cells + 1, 0, dtype=np.int64)
    for i in range(n):
        start[cell[i] + 1] += 1
    for c in range(n_cells):
        start[c + 1] += start[c]
    max_ring = max(dims[0], dims[1], dims[2])
    for i in range(n):
        best = np.inf
        x0, x1, x2 = points[i, 0], points[i, 1], points[i, 2]
        r = 0
        while r <= max_ring:
            for a in range(ci[i, 0] - r, ci[i, 0] + r + 1):
                if a < 0 or a >= dims[0]:
                    continue
                for b in range(ci[i, 1] - r, ci[i, 1] + r + 1):
                    if b < 0 or b >= dims[1]:
                        continue
                    for c in range(ci[i, 2] - r, ci[i, 2] + r + 1):
                        if c < 0 or c >= dims[2]:
                            continue
                        # only the shell of the cube is new at ring r
                        if (abs(a - ci[i, 0]) != r and abs(b - ci[i, 1]) != r
                                and abs(c - ci[i, 2]) != r):
                            continue
                        cid = (a * dims[1] + b) * dims[2] + c
                        for s in range(start[cid], start[cid + 1]):
                            j = order[s]
                            if j == i:
                                continue
                            d0 = points[j, 0] - x0
                            d1 = points[j, 1] - x1
                            d2 = points[j, 2] - x2
                            d = d0 * d0 + d1 * d1 + d2 * d2
                            if d < best:
                                best = d
            # every point outside the searched cube is at least r * h away
            if best < np.inf and math.sqrt(best) <= r * h:
                break
            r += 1
        out[i] = math.sqrt(best)
    return out


@numba.njit(cache=True, inline="always")
def _arc(a, b):
    dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    return math.acos(min(1.0, max(-1.0, dot)))


@numba.njit(cache=True)
def _pruned_areas(d, tri, limit):
    """Spherical area of each triangle, zero where its longest arc exceeds ``limit``."""
    m = tri.shape[0]
    areas = np.zeros(m)
    kept = np.zeros(m, dtype=np.bool_)
    for t in range(m):
        pa = d[tri[t, 0]]
        pb = d[tri[t, 1]]
        pc = d[tri[t, 2]]
        ea = _arc(pb, pc)
        eb = _arc(pa, pc)
        ec = _arc(pa, pb)
        if max(ea, eb, ec) > limit[t]:
            continue
        kept[t] = True
        s = 0.5 * (ea + eb + ec)
        q = (math.tan(0.5 * s) * math.tan(0.5 * (s - ea))
             * math.tan(0.5 * (s - eb)) * math.tan(0.5 * (s - ec)))
        areas[t] = 4.0 * math.atan(math.sqrt(max(q, 0.0)))
    return areas, kept


def nearest_neighbor_distances(points):
    """Distance to the nearest other point, for an (n, 3) array."""
    return _nn_chord(np.ascontiguousarray(points, dtype=np.float64))


def pruned_spherical_areas(directions, triangles, limit):
    """Per-triangle spherical areas and keep flags under a per-triangle arc limit."""
    return _pruned_areas(
        np.ascontiguousarray(directions, dtype=np.float64),
        np.ascontiguousarray(triangles, dtype=np.int64),
        np.ascontiguousarray(np.broadcast_to(limit, (len(triangles),)), dtype=np.float64),
    )
