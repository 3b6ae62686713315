"""Synthetic shapes with analytically known skeletons.

Surfaces are sampled uniformly by area. Tubes (dumbbell, L shape) are unions
of capsules: candidates drawn on every capsule boundary are kept only if no
other capsule contains them, which leaves the outer surface of the union.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive_int
from .geometry import CurveSkeleton, PointCloud, SkeletalPointSet

KINDS = ("sphere", "cylinder", "torus", "box", "dumbbell", "L-polyline")


@dataclass
class SyntheticShape:
    """Sampled surface plus ground truth where the medial structure is a curve or point."""

    kind: str
    params: dict
    cloud: PointCloud
    curve: CurveSkeleton = None
    center: np.ndarray = None
    notes: list = field(default_factory=list)


def _positive(params, *names):
    for name in names:
        if not params[name] > 0:
            raise ValueError(f"{name} must be positive, got {params[name]}")


def polyline(points, segments_per_edge=1):
    """Curve skeleton of an open polyline, each leg split into equal segments."""
    pts = np.asarray(points, dtype=np.float64)
    verts = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        for s in range(1, segments_per_edge + 1):
            verts.append(a + (b - a) * s / segments_per_edge)
    n = len(verts)
    edges = np.column_stack([np.arange(n - 1), np.arange(1, n)])
    return CurveSkeleton(np.array(verts), edges)


def fibonacci_sphere(n, radius=1.0, center=(0.0, 0.0, 0.0)):
    """``n`` near-uniform points on a sphere along a golden-angle spiral."""
    i = np.arange(n) + 0.5
    polar = np.arccos(1.0 - 2.0 * i / n)
    azim = np.pi * (1.0 + 5.0**0.5) * i
    unit = np.column_stack([np.cos(azim) * np.sin(polar), np.sin(azim) * np.sin(polar), np.cos(polar)])
    return np.asarray(center, dtype=np.float64) + radius * unit


def _unit_vectors(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _perp_frame(d):
    d = d / np.linalg.norm(d)
    axis = np.zeros(3)
    axis[np.argmin(np.abs(d))] = 1.0
    e1 = axis - np.dot(axis, d) * d
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(d, e1)


def _cylinder_sample(rng, n, radius, length, caps=True):
    """Closed cylinder along z, centred at the origin, sampled by area."""
    lateral = 2 * np.pi * radius * length
    cap = np.pi * radius**2 if caps else 0.0
    which = rng.choice(3, size=n, p=np.array([lateral, cap, cap]) / (lateral + 2 * cap))
    theta = rng.uniform(0, 2 * np.pi, n)
    # disks: sqrt for uniform area density
    rad = np.where(which == 0, radius, radius * np.sqrt(rng.uniform(0, 1, n)))
    z = np.where(which == 0, rng.uniform(-length / 2, length / 2, n),
                 np.where(which == 1, -length / 2, length / 2))
    return np.column_stack([rad * np.cos(theta), rad * np.sin(theta), z])


def _torus_sample(rng, n, major, minor):
    pts = np.empty((0, 3))
    while pts.shape[0] < n:
        m = 2 * (n - pts.shape[0]) + 16
        u = rng.uniform(0, 2 * np.pi, m)
        v = rng.uniform(0, 2 * np.pi, m)
        # area element is proportional to major + minor * cos(v)
        keep = rng.uniform(0, major + minor, m) < major + minor * np.cos(v)
        u, v = u[keep], v[keep]
        ring = major + minor * np.cos(v)
        pts = np.vstack([pts, np.column_stack([ring * np.cos(u), ring * np.sin(u), minor * np.sin(v)])])
    return pts[:n]


def _box_sample(rng, n, size):
    sx, sy, sz = size
    areas = np.array([sy * sz, sy * sz, sx * sz, sx * sz, sx * sy, sx * sy])
    face = rng.choice(6, size=n, p=areas / areas.sum())
    p = rng.uniform(-0.5, 0.5, (n, 3)) * np.array(size)
    axis = face // 2
    sign = np.where(face % 2 == 0, -0.5, 0.5)
    p[np.arange(n), axis] = sign * np.array(size)[axis]
    return p


def _segment_distance(p, a, b):
    d = b - a
    dd = float(np.dot(d, d))
    t = np.zeros(len(p)) if dd == 0 else np.clip((p - a) @ d / dd, 0.0, 1.0)
    return np.linalg.norm(p - (a + t[:, None] * d), axis=1)


def _capsule_union_sample(rng, n, capsules):
    """Sample the outer surface of a union of capsules ``(a, b, radius)``.

    The boundary pieces are the distinct end spheres and the tube sides;
    candidates are drawn on each piece proportionally to its area and kept
    when no capsule strictly contains them.
    """
    spheres, tubes = {}, []
    for a, b, r in capsules:
        a, b = np.asarray(a, float), np.asarray(b, float)
        for c in (a, b):
            spheres[(tuple(c), float(r))] = (c, float(r))
        if np.linalg.norm(b - a) > 0:
            tubes.append((a, b, float(r)))
    spheres = list(spheres.values())
    pieces = [("sphere", s) for s in spheres] + [("tube", t) for t in tubes]
    areas = np.array([4 * np.pi * s[1] ** 2 for s in spheres]
                     + [2 * np.pi * t[2] * np.linalg.norm(t[1] - t[0]) for t in tubes])
    pts = np.empty((0, 3))
    while pts.shape[0] < n:
        m = 3 * (n - pts.shape[0]) + 64
        owner = rng.choice(len(pieces), size=m, p=areas / areas.sum())
        cand = np.empty((m, 3))
        for c, (kind, geom) in enumerate(pieces):
            sel = np.flatnonzero(owner == c)
            if sel.size == 0:
                continue
            if kind == "sphere":
                center, r = geom
                cand[sel] = center + r * _unit_vectors(rng, sel.size)
            else:
                a, b, r = geom
                e1, e2 = _perp_frame(b - a)
                th = rng.uniform(0, 2 * np.pi, sel.size)
                t = rng.uniform(0, 1, sel.size)
                cand[sel] = (a + t[:, None] * (b - a)
                             + r * (np.cos(th)[:, None] * e1 + np.sin(th)[:, None] * e2))
        inside = np.zeros(m, dtype=bool)
        for a, b, r in capsules:
            inside |= _segment_distance(cand, np.asarray(a, float), np.asarray(b, float)) < r * (1 - 1e-9)
        pts = np.vstack([pts, cand[~inside]])
    return pts[:n]


def generate(kind, n=4096, seed=0, **params):
    """Generate a synthetic shape.

    Parameters
    ----------
    kind : {"sphere", "cylinder", "torus", "box", "dumbbell", "L-polyline"}
    n : int
        Number of surface samples (at least 4).
    seed : int
        Seed for the random sampler; the sphere uses a deterministic spiral.
    **params
        ``sphere``: ``radius`` (1). ``cylinder``: ``radius`` (0.1), ``length``
        (1), ``segments`` (10). ``torus``: ``major`` (1), ``minor`` (0.2),
        ``segments`` (64). ``box``: ``size`` ((1, 1, 1)). ``dumbbell``:
        ``bulb_radius`` (0.3), ``bar_radius`` (0.1), ``separation`` (1.2),
        ``segments`` (12). ``L-polyline``: ``radius`` (0.08), ``arm`` (1),
        ``segments`` (10 per arm).
    """
    n = check_positive_int(n, "n", minimum=4)
    rng = np.random.default_rng(seed)
    if kind == "sphere":
        p = {"radius": 1.0, **params}
        _positive(p, "radius")
        return SyntheticShape(kind, p, PointCloud(fibonacci_sphere(n, p["radius"])), center=np.zeros(3))
    if kind == "cylinder":
        p = {"radius": 0.1, "length": 1.0, "segments": 10, **params}
        _positive(p, "radius", "length", "segments")
        cloud = _cylinder_sample(rng, n, p["radius"], p["length"])
        axis = polyline([[0, 0, -p["length"] / 2], [0, 0, p["length"] / 2]], int(p["segments"]))
        return SyntheticShape(kind, p, PointCloud(cloud), curve=axis)
    if kind == "torus":
        p = {"major": 1.0, "minor": 0.2, "segments": 64, **params}
        _positive(p, "major", "minor", "segments")
        if p["minor"] >= p["major"]:
            raise ValueError("torus needs minor < major")
        m = int(p["segments"])
        ang = 2 * np.pi * np.arange(m) / m
        verts = np.column_stack([p["major"] * np.cos(ang), p["major"] * np.sin(ang), np.zeros(m)])
        ring = CurveSkeleton(verts, np.column_stack([np.arange(m), (np.arange(m) + 1) % m]))
        return SyntheticShape(kind, p, PointCloud(_torus_sample(rng, n, p["major"], p["minor"])), curve=ring)
    if kind == "box":
        p = {"size": (1.0, 1.0, 1.0), **params}
        size = tuple(float(s) for s in p["size"])
        if len(size) != 3 or min(size) <= 0:
            raise ValueError(f"box size must be three positive lengths, got {p['size']}")
        p["size"] = size
        shape = SyntheticShape(kind, p, PointCloud(_box_sample(rng, n, size)), center=np.zeros(3))
        shape.notes.append("box medial structure is a surface; no curve ground truth")
        return shape
    if kind == "dumbbell":
        p = {"bulb_radius": 0.3, "bar_radius": 0.1, "separation": 1.2, "segments": 12, **params}
        _positive(p, "bulb_radius", "bar_radius", "separation", "segments")
        if p["bar_radius"] >= p["bulb_radius"]:
            raise ValueError("dumbbell needs bar_radius < bulb_radius")
        h = p["separation"] / 2
        a, b = np.array([-h, 0, 0]), np.array([h, 0, 0])
        caps = [(a, a, p["bulb_radius"]), (b, b, p["bulb_radius"]), (a, b, p["bar_radius"])]
        cloud = _capsule_union_sample(rng, n, caps)
        return SyntheticShape(kind, p, PointCloud(cloud), curve=polyline([a, b], int(p["segments"])))
    if kind == "L-polyline":
        p = {"radius": 0.08, "arm": 1.0, "segments": 10, **params}
        _positive(p, "radius", "arm", "segments")
        corners = np.array([[0, p["arm"], 0], [0, 0, 0], [p["arm"], 0, 0]], dtype=float)
        caps = [(corners[0], corners[1], p["radius"]), (corners[1], corners[2], p["radius"])]
        cloud = _capsule_union_sample(rng, n, caps)
        return SyntheticShape(kind, p, PointCloud(cloud), curve=polyline(corners, int(p["segments"])))
    raise ValueError(f"unknown shape kind {kind!r}; choose from {', '.join(KINDS)}")


def closest_on_skeleton(points, skeleton):
    """Closest point on any skeleton edge for each input point."""
    pts = np.asarray(points, dtype=np.float64)
    best = np.full(len(pts), np.inf)
    out = np.empty_like(pts)
    for a_i, b_i in skeleton.edges:
        a, b = skeleton.vertices[a_i], skeleton.vertices[b_i]
        d = b - a
        dd = float(np.dot(d, d))
        t = np.zeros(len(pts)) if dd == 0 else np.clip((pts - a) @ d / dd, 0.0, 1.0)
        proj = a + t[:, None] * d
        dist = np.linalg.norm(pts - proj, axis=1)
        closer = dist < best
        best[closer] = dist[closer]
        out[closer] = proj[closer]
    return out


def contract(cloud, skeleton, amount=0.95):
    """Skeletal point set made by moving each point ``amount`` of the way to the skeleton.

    A stand-in for a contraction-based skeletonizer: index ``i`` of the
    result corresponds to point ``i`` of ``cloud``.
    """
    if not 0.0 <= amount <= 1.0:
        raise ValueError(f"amount must be in [0, 1], got {amount}")
    pts = np.asarray(cloud, dtype=np.float64)
    target = closest_on_skeleton(pts, skeleton)
    return SkeletalPointSet(pts + amount * (target - pts))
