"""Sweep-hull 2D Delaunay triangulation (Delaunator algorithm) compiled with numba.

Used for the per-query sphere coverage, where scipy's Qhull wrapper costs
~12 ms per 4k-point triangulation and dominates evaluation time.
"""

import math

import numba
import numpy as np

_EPSILON = 2.0**-52
_STACK_SIZE = 512


@numba.njit(cache=True, inline="always")
def _dist2(ax, ay, bx, by):
    dx = ax - bx
    dy = ay - by
    return dx * dx + dy * dy


@numba.njit(cache=True, inline="always")
def _orient_if_sure(px, py, rx, ry, qx, qy):
    left = (ry - py) * (qx - px)
    right = (rx - px) * (qy - py)
    if abs(left - right) >= 3.3306690738754716e-16 * abs(left + right):
        return left - right
    return 0.0


@numba.njit(cache=True)
def _orient(rx, ry, qx, qy, px, py):
    # True when (r, q, p) turn clockwise
    v = _orient_if_sure(px, py, rx, ry, qx, qy)
    if v == 0.0:
        v = _orient_if_sure(rx, ry, qx, qy, px, py)
    if v == 0.0:
        v = _orient_if_sure(qx, qy, px, py, rx, ry)
    return v < 0.0


@numba.njit(cache=True, inline="always")
def _in_circle(ax, ay, bx, by, cx, cy, px, py):
    dx = ax - px
    dy = ay - py
    ex = bx - px
    ey = by - py
    fx = cx - px
    fy = cy - py
    ap = dx * dx + dy * dy
    bp = ex * ex + ey * ey
    cp = fx * fx + fy * fy
    return dx * (ey * cp - bp * fy) - dy * (ex * cp - bp * fx) + ap * (ex * fy - ey * fx) < 0.0


@numba.njit(cache=True)
def _circumradius2(ax, ay, bx, by, cx, cy):
    dx = bx - ax
    dy = by - ay
    ex = cx - ax
    ey = cy - ay
    bl = dx * dx + dy * dy
    cl = ex * ex + ey * ey
    den = dx * ey - dy * ex
    if den == 0.0:
        return math.inf
    d = 0.5 / den
    x = (ey * bl - dy * cl) * d
    y = (dx * cl - ex * bl) * d
    r = x * x + y * y
    if not math.isfinite(r):
        return math.inf
    return r


@numba.njit(cache=True)
def _circumcenter(ax, ay, bx, by, cx, cy):
    dx = bx - ax
    dy = by - ay
    ex = cx - ax
    ey = cy - ay
    bl = dx * dx + dy * dy
    cl = ex * ex + ey * ey
    d = 0.5 / (dx * ey - dy * ex)
    return ax + (ey * bl - dy * cl) * d, ay + (dx * cl - ex * bl) * d


@numba.njit(cache=True, inline="always")
def _pseudo_angle(dx, dy):
    p = dx / (abs(dx) + abs(dy))
    if dy > 0.0:
        return (3.0 - p) / 4.0
    return (1.0 + p) / 4.0


@numba.njit(cache=True, inline="always")
def _hash_key(x, y, cx, cy, hash_size):
    return int(math.floor(_pseudo_angle(x - cx, y - cy) * hash_size)) % hash_size


@numba.njit(cache=True, inline="always")
def _link(halfedges, a, b):
    halfedges[a] = b
    if b != -1:
        halfedges[b] = a


@numba.njit(cache=True)
def _add_triangle(triangles, halfedges, t, i0, i1, i2, a, b, c):
    triangles[t] = i0
    triangles[t + 1] = i1
    triangles[t + 2] = i2
    _link(halfedges, t, a)
    _link(halfedges, t + 1, b)
    _link(halfedges, t + 2, c)


@numba.njit(cache=True)
def _legalize(a, coords, triangles, halfedges, hull_tri, hull_prev, hull_start, stack):
    i = 0
    ar = 0
    while True:
        b = halfedges[a]
        a0 = a - a % 3
        ar = a0 + (a + 2) % 3
        if b == -1:
            if i == 0:
                break
            i -= 1
            a = stack[i]
            continue

        b0 = b - b % 3
        al = a0 + (a + 1) % 3
        bl = b0 + (b + 2) % 3
        p0 = triangles[ar]
        pr = triangles[a]
        pl = triangles[al]
        p1 = triangles[bl]
        illegal = _in_circle(
            coords[p0, 0], coords[p0, 1],
            coords[pr, 0], coords[pr, 1],
            coords[pl, 0], coords[pl, 1],
            coords[p1, 0], coords[p1, 1],
        )
        if illegal:
            triangles[a] = p1
            triangles[b] = p0
            hbl = halfedges[bl]
            if hbl == -1:
                e = hull_start
                while True:
                    if hull_tri[e] == bl:
                        hull_tri[e] = a
                        break
                    e = hull_prev[e]
                    if e == hull_start:
                        break
            _link(halfedges, a, hbl)
            _link(halfedges, b, halfedges[ar])
            _link(halfedges, ar, bl)
            br = b0 + (b + 1) % 3
            if i < stack.shape[0]:
                stack[i] = br
                i += 1
        else:
            if i == 0:
                break
            i -= 1
            a = stack[i]
    return ar


@numba.njit(cache=True)
def _triangulate(coords):
    n = coords.shape[0]
    empty = (np.empty((0, 3), dtype=np.int64), np.empty(0, dtype=np.int64))
    if n < 3:
        return empty

    min_x = math.inf
    min_y = math.inf
    max_x = -math.inf
    max_y = -math.inf
    for i in range(n):
        x = coords[i, 0]
        y = coords[i, 1]
        min_x = min(min_x, x)
        min_y = min(min_y, y)
        max_x = max(max_x, x)
        max_y = max(max_y, y)
    cx = 0.5 * (min_x + max_x)
    cy = 0.5 * (min_y + max_y)

    i0 = 0
    best = math.inf
    for i in range(n):
        d = _dist2(cx, cy, coords[i, 0], coords[i, 1])
        if d < best:
            i0 = i
            best = d
    i0x = coords[i0, 0]
    i0y = coords[i0, 1]

    i1 = -1
    best = math.inf
    for i in range(n):
        if i == i0:
            continue
        d = _dist2(i0x, i0y, coords[i, 0], coords[i, 1])
        if d < best and d > 0.0:
            i1 = i
            best = d
    if i1 == -1:
        return empty
    i1x = coords[i1, 0]
    i1y = coords[i1, 1]

    i2 = -1
    min_radius = math.inf
    for i in range(n):
        if i == i0 or i == i1:
            continue
        r = _circumradius2(i0x, i0y, i1x, i1y, coords[i, 0], coords[i, 1])
        if r < min_radius:
            i2 = i
            min_radius = r
    if i2 == -1 or min_radius == math.inf:
        # all points collinear
        return empty
    i2x = coords[i2, 0]
    i2y = coords[i2, 1]

    if _orient(i0x, i0y, i1x, i1y, i2x, i2y):
        i1, i2 = i2, i1
        i1x, i2x = i2x, i1x
        i1y, i2y = i2y, i1y

    ccx, ccy = _circumcenter(i0x, i0y, i1x, i1y, i2x, i2y)
    dists = np.empty(n)
    for i in range(n):
        dists[i] = _dist2(coords[i, 0], coords[i, 1], ccx, ccy)
    # stable sort keeps distance ties in input order
    ids = np.argsort(dists, kind="mergesort")

    max_triangles = max(2 * n - 5, 1)
    triangles = np.empty(max_triangles * 3, dtype=np.int64)
    halfedges = np.empty(max_triangles * 3, dtype=np.int64)
    hash_size = int(math.ceil(math.sqrt(n)))
    hull_prev = np.zeros(n, dtype=np.int64)
    hull_next = np.zeros(n, dtype=np.int64)
    hull_tri = np.zeros(n, dtype=np.int64)
    hull_hash = np.full(hash_size, -1, dtype=np.int64)
    stack = np.empty(_STACK_SIZE, dtype=np.int64)

    hull_start = i0
    hull_next[i0] = i1
    hull_prev[i2] = i1
    hull_next[i1] = i2
    hull_prev[i0] = i2
    hull_next[i2] = i0
    hull_prev[i1] = i0
    hull_tri[i0] = 0
    hull_tri[i1] = 1
    hull_tri[i2] = 2
    hull_hash[_hash_key(i0x, i0y, ccx, ccy, hash_size)] = i0
    hull_hash[_hash_key(i1x, i1y, ccx, ccy, hash_size)] = i1
    hull_hash[_hash_key(i2x, i2y, ccx, ccy, hash_size)] = i2

    n_tri = 0
    _add_triangle(triangles, halfedges, n_tri, i0, i1, i2, -1, -1, -1)
    n_tri += 3

    xp = 0.0
    yp = 0.0
    for k in range(n):
        i = ids[k]
        x = coords[i, 0]
        y = coords[i, 1]
        if k > 0 and abs(x - xp) <= _EPSILON and abs(y - yp) <= _EPSILON:
            continue
        xp = x
        yp = y
        if i == i0 or i == i1 or i == i2:
            continue

        start = 0
        key = _hash_key(x, y, ccx, ccy, hash_size)
        for j in range(hash_size):
            start = hull_hash[(key + j) % hash_size]
            if start != -1 and start != hull_next[start]:
                break
        start = hull_prev[start]
        e = start
        while True:
            q = hull_next[e]
            if _orient(x, y, coords[e, 0], coords[e, 1], coords[q, 0], coords[q, 1]):
                break
            e = q
            if e == start:
                e = -1
                break
        if e == -1:
            # near-duplicate point
            continue

        if n_tri + 3 > triangles.shape[0]:
            triangles = np.concatenate((triangles, np.empty(triangles.shape[0], dtype=np.int64)))
            halfedges = np.concatenate((halfedges, np.empty(halfedges.shape[0], dtype=np.int64)))
        t = n_tri
        _add_triangle(triangles, halfedges, t, e, i, hull_next[e], -1, -1, hull_tri[e])
        n_tri += 3
        hull_tri[i] = _legalize(t + 2, coords, triangles, halfedges, hull_tri, hull_prev, hull_start, stack)
        hull_tri[e] = t

        nx = hull_next[e]
        while True:
            q = hull_next[nx]
            if not _orient(x, y, coords[nx, 0], coords[nx, 1], coords[q, 0], coords[q, 1]):
                break
            if n_tri + 3 > triangles.shape[0]:
                triangles = np.concatenate((triangles, np.empty(triangles.shape[0], dtype=np.int64)))
                halfedges = np.concatenate((halfedges, np.empty(halfedges.shape[0], dtype=np.int64)))
            t = n_tri
            _add_triangle(triangles, halfedges, t, nx, i, q, hull_tri[i], -1, hull_tri[nx])
            n_tri += 3
            hull_tri[i] = _legalize(t + 2, coords, triangles, halfedges, hull_tri, hull_prev, hull_start, stack)
            hull_next[nx] = nx
            nx = q

        if e == start:
            while True:
                q = hull_prev[e]
                if not _orient(x, y, coords[q, 0], coords[q, 1], coords[e, 0], coords[e, 1]):
                    break
                if n_tri + 3 > triangles.shape[0]:
                    triangles = np.concatenate((triangles, np.empty(triangles.shape[0], dtype=np.int64)))
                    halfedges = np.concatenate((halfedges, np.empty(halfedges.shape[0], dtype=np.int64)))
                t = n_tri
                _add_triangle(triangles, halfedges, t, q, i, e, -1, hull_tri[e], hull_tri[q])
                n_tri += 3
                _legalize(t + 2, coords, triangles, halfedges, hull_tri, hull_prev, hull_start, stack)
                hull_tri[q] = t
                hull_next[e] = e
                e = q

        hull_start = e
        hull_prev[i] = e
        hull_next[e] = i
        hull_prev[nx] = i
        hull_next[i] = nx
        hull_hash[_hash_key(x, y, ccx, ccy, hash_size)] = i
        hull_hash[_hash_key(coords[e, 0], coords[e, 1], ccx, ccy, hash_size)] = e

    return triangles[:n_tri].reshape(-1, 3), halfedges[:n_tri]


def delaunay_triangles(points2d):
    """Delaunay triangles of a 2D point set as an (m, 3) index array.

    Triangles are clockwise in a y-up frame. Exact duplicates are
    skipped; fewer than three distinct or all-collinear points give an
    empty array.
    """
    return delaunay_with_halfedges(points2d)[0]


def delaunay_with_halfedges(points2d):
    """Delaunay triangles plus the half-edge twin array.

    Half-edge ``e`` runs from ``triangles.flat[e]`` to the next vertex of its
    triangle; ``halfedges[e]`` is the opposite half-edge or -1 on the hull.
    """
    pts = np.ascontiguousarray(points2d, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected (n, 2) points, got shape {pts.shape}")
    return _triangulate(pts)


@numba.njit(cache=True, inline="always")
def _det3(a, b, c, d, sphere):
    # orientation of d against the plane through a, b, c
    ax = sphere[b, 0] - sphere[a, 0]
    ay = sphere[b, 1] - sphere[a, 1]
    az = sphere[b, 2] - sphere[a, 2]
    bx = sphere[c, 0] - sphere[a, 0]
    by = sphere[c, 1] - sphere[a, 1]
    bz = sphere[c, 2] - sphere[a, 2]
    cx = d[0] - sphere[a, 0]
    cy = d[1] - sphere[a, 1]
    cz = d[2] - sphere[a, 2]
    return ax * (by * cz - bz * cy) - ay * (bx * cz - bz * cx) + az * (bx * cy - by * cx)


@numba.njit(cache=True, inline="always")
def _side(o, p, q, sphere):
    # sign of q relative to the great circle through o and p
    nx = sphere[o, 1] * sphere[p, 2] - sphere[o, 2] * sphere[p, 1]
    ny = sphere[o, 2] * sphere[p, 0] - sphere[o, 0] * sphere[p, 2]
    nz = sphere[o, 0] * sphere[p, 1] - sphere[o, 1] * sphere[p, 0]
    return nx * sphere[q, 0] + ny * sphere[q, 1] + nz * sphere[q, 2]


@numba.njit(cache=True)
def _sphere_flip(triangles, halfedges, sphere, tol):
    tri = triangles.ravel()
    m = tri.shape[0]
    origin = np.zeros(3)
    stack = np.arange(m)
    on_stack = np.ones(m, dtype=np.bool_)
    top = m
    flips = 0
    max_flips = 50 * m + 100
    while top > 0 and flips < max_flips:
        top -= 1
        a = stack[top]
        on_stack[a] = False
        b = halfedges[a]
        if b == -1:
            continue
        a0 = a - a % 3
        b0 = b - b % 3
        al = a0 + (a + 1) % 3
        ar = a0 + (a + 2) % 3
        bl = b0 + (b + 2) % 3
        br = b0 + (b + 1) % 3
        p0 = tri[ar]
        pr = tri[a]
        pl = tri[al]
        p1 = tri[bl]
        if p0 == p1 or p0 == pr or p0 == pl or p1 == pr or p1 == pl:
            continue
        # p1 inside the circumcircle of (pr, pl, p0) iff it lies on the far
        # side of their plane from the sphere centre
        s_o = _det3(pr, pl, p0, origin, sphere)
        s_d = _det3(pr, pl, p0, sphere[p1], sphere)
        if not (s_o * s_d < 0.0 and abs(s_d) > tol):
            continue
        # the quad must be convex on the sphere: the new diagonal p0-p1
        # separates pr from pl, and the old diagonal separates p0 from p1
        if _side(p0, p1, pr, sphere) * _side(p0, p1, pl, sphere) >= 0.0:
            continue
        if _side(pr, pl, p0, sphere) * _side(pr, pl, p1, sphere) >= 0.0:
            continue
        tri[a] = p1
        tri[b] = p0
        hbl = halfedges[bl]
        har = halfedges[ar]
        halfedges[a] = hbl
        if hbl != -1:
            halfedges[hbl] = a
        halfedges[b] = har
        if har != -1:
            halfedges[har] = b
        halfedges[ar] = bl
        halfedges[bl] = ar
        flips += 1
        for e in (a, al, b, br):
            if not on_stack[e]:
                on_stack[e] = True
                stack[top] = e
                top += 1
    return flips


def spherical_delaunay_flip(triangles, halfedges, sphere_points, tol=1e-15):
    """Lawson-flip a triangulation in place until it is Delaunay on the unit sphere.

    ``sphere_points[i]`` is the unit vector of planar vertex ``i``. Only
    convex quads are flipped, so a valid triangulation stays valid; copies of
    one direction never take part in a flip. Returns the number of flips.
    """
    if triangles.shape[0] == 0:
        return 0
    sphere = np.ascontiguousarray(sphere_points, dtype=np.float64)
    return int(_sphere_flip(triangles, halfedges, sphere, tol))
