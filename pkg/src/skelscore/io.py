"""Readers and writers for clouds, skeletons, reports and diagnostic plots.

Formats
-------
XYZ
    One point per line, whitespace-separated floats; extra columns are
    ignored, blank lines and ``#`` comments skipped.
PLY
    ASCII or binary (little- or big-endian). Only ``x``, ``y``, ``z`` of the
    ``vertex`` element are read; faces and other properties are ignored.
OBJ
    ``v x y z`` vertices and ``l i j ...`` polylines (1-based, negative
    indices count from the end); every other record is ignored.
Edge list
    Header ``n m``, then ``n`` vertex lines ``x y z`` and ``m`` edge lines
    ``i j`` (0-based).
"""

import json
import math
import os

import numpy as np

from .geometry import CurveSkeleton, PointCloud, PersistenceBarcode

PLY_TYPES = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
}

MAGENTA = (255, 0, 255)
# cold -> neutral -> warm
_RAMP = np.array([[59, 76, 192], [221, 221, 221], [180, 4, 38]], dtype=float)


class FormatError(ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, path, message, line=None):
        self.path = str(path)
        self.line = line
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")


def _floats(tokens, path, line, count=3):
    if len(tokens) < count:
        raise FormatError(path, f"expected {count} numbers, got {len(tokens)}", line)
    try:
        vals = [float(t) for t in tokens[:count]]
    except ValueError:
        raise FormatError(path, f"not a number in {' '.join(tokens)!r}", line) from None
    if not all(math.isfinite(v) for v in vals):
        raise FormatError(path, "non-finite coordinate", line)
    return vals


def _format_of(path, fmt, choices):
    if fmt is None:
        ext = os.path.splitext(str(path))[1].lower().lstrip(".")
        fmt = {"txt": "xyz", "pts": "xyz", "edges": "edge-list", "el": "edge-list"}.get(ext, ext)
    if fmt not in choices:
        raise ValueError(f"{path}: unsupported format {fmt!r}; expected one of {', '.join(choices)}")
    return fmt


# -- point clouds -----------------------------------------------------------


def load_point_cloud(path, fmt=None):
    """Load a point cloud from XYZ or PLY, preserving file order."""
    fmt = _format_of(path, fmt, ("xyz", "ply"))
    pts = _read_ply_vertices(path) if fmt == "ply" else _read_xyz(path)
    if len(pts) == 0:
        raise FormatError(path, "no points")
    return PointCloud(pts)


def _read_xyz(path):
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.split("#", 1)[0].split()
            if s:
                rows.append(_floats(s, path, lineno))
    return np.array(rows, dtype=np.float64).reshape(-1, 3)


def _parse_ply_header(fh, path):
    first = fh.readline()
    if first.strip() != b"ply":
        raise FormatError(path, "missing 'ply' magic", 1)
    fmt, elements, lineno = None, [], 1
    while True:
        raw = fh.readline()
        lineno += 1
        if not raw:
            raise FormatError(path, "header ends without end_header", lineno)
        tokens = raw.decode("ascii", errors="replace").split()
        if not tokens or tokens[0] in ("comment", "obj_info"):
            continue
        key = tokens[0]
        if key == "format":
            if len(tokens) < 2 or tokens[1] not in ("ascii", "binary_little_endian", "binary_big_endian"):
                raise FormatError(path, f"unknown format {' '.join(tokens[1:])!r}", lineno)
            fmt = tokens[1]
        elif key == "element":
            if len(tokens) != 3 or not tokens[2].isdigit():
                raise FormatError(path, "malformed element line", lineno)
            elements.append({"name": tokens[1], "count": int(tokens[2]), "props": []})
        elif key == "property":
            if not elements:
                raise FormatError(path, "property before any element", lineno)
            if len(tokens) >= 5 and tokens[1] == "list":
                if tokens[2] not in PLY_TYPES or tokens[3] not in PLY_TYPES:
                    raise FormatError(path, f"unknown list type in {' '.join(tokens)!r}", lineno)
                elements[-1]["props"].append((tokens[4], ("list", tokens[2], tokens[3])))
            elif len(tokens) == 3 and tokens[1] in PLY_TYPES:
                elements[-1]["props"].append((tokens[2], tokens[1]))
            else:
                raise FormatError(path, f"malformed property {' '.join(tokens)!r}", lineno)
        elif key == "end_header":
            break
        else:
            raise FormatError(path, f"unexpected header keyword {key!r}", lineno)
    if fmt is None:
        raise FormatError(path, "no format line in header")
    return fmt, elements, lineno


def _read_ply_vertices(path):
    with open(path, "rb") as fh:
        fmt, elements, header_lines = _parse_ply_header(fh, path)
        names = [e["name"] for e in elements]
        if "vertex" not in names:
            raise FormatError(path, "no vertex element")
        vertex = elements[names.index("vertex")]
        props = [p for p, _ in vertex["props"]]
        for axis in "xyz":
            if axis not in props:
                raise FormatError(path, f"vertex element lacks property {axis!r}")
        if fmt == "ascii":
            return _read_ply_ascii(fh, path, elements, vertex, header_lines)
        order = "<" if fmt == "binary_little_endian" else ">"
        for e in elements[: names.index("vertex")]:
            if any(isinstance(t, tuple) for _, t in e["props"]):
                raise FormatError(path, f"cannot skip list element {e['name']!r} before vertices")
            dt = np.dtype([(p, order + PLY_TYPES[t]) for p, t in e["props"]])
            fh.seek(dt.itemsize * e["count"], os.SEEK_CUR)
        if any(isinstance(t, tuple) for _, t in vertex["props"]):
            raise FormatError(path, "list properties on vertices are not supported")
        dt = np.dtype([(p, order + PLY_TYPES[t]) for p, t in vertex["props"]])
        offset = fh.tell()
        buf = fh.read(dt.itemsize * vertex["count"])
        if len(buf) < dt.itemsize * vertex["count"]:
            got = len(buf) // dt.itemsize
            raise FormatError(path, f"truncated binary data at byte offset {offset + len(buf)}: "
                                    f"{got} of {vertex['count']} vertices")
        data = np.frombuffer(buf, dtype=dt, count=vertex["count"])
        pts = np.column_stack([data[a].astype(np.float64) for a in "xyz"])
        if not np.all(np.isfinite(pts)):
            raise FormatError(path, "non-finite coordinate")
        return pts


def _read_ply_ascii(fh, path, elements, vertex, lineno):
    cols = [p for p, _ in vertex["props"]]
    ix = [cols.index(a) for a in "xyz"]
    for e in elements:
        rows = []
        for _ in range(e["count"]):
            raw = fh.readline()
            lineno += 1
            if not raw:
                raise FormatError(path, f"file ends inside element {e['name']!r}", lineno)
            if e is not vertex:
                continue
            tokens = raw.decode("ascii", errors="replace").split()
            if len(tokens) != len(cols):
                raise FormatError(path, f"expected {len(cols)} values, got {len(tokens)}", lineno)
            rows.append(_floats([tokens[i] for i in ix], path, lineno))
        if e is vertex:
            return np.array(rows, dtype=np.float64).reshape(-1, 3)
    raise FormatError(path, "no vertex element")


def save_point_cloud(path, cloud, fmt=None, binary=False):
    """Write a cloud as XYZ or PLY (``binary=True`` writes little-endian float64)."""
    fmt = _format_of(path, fmt, ("xyz", "ply"))
    pts = np.asarray(cloud, dtype=np.float64)
    if fmt == "xyz":
        with open(path, "w", encoding="utf-8") as fh:
            for p in pts:
                fh.write(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}\n")
        return
    kind = "double" if binary else "float"
    header = (
        "ply\n"
        f"format {'binary_little_endian' if binary else 'ascii'} 1.0\n"
        f"element vertex {len(pts)}\n"
        f"property {kind} x\nproperty {kind} y\nproperty {kind} z\n"
        "end_header\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        if binary:
            fh.write(pts.astype("<f8").tobytes())
        else:
            fh.write("".join(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}\n" for p in pts).encode("ascii"))


def load_indices(path):
    """One non-negative integer per line, e.g. a skeletal-to-original correspondence."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.split("#", 1)[0].strip()
            if not s:
                continue
            try:
                v = int(s)
            except ValueError:
                raise FormatError(path, f"expected one integer, got {s!r}", lineno) from None
            if v < 0:
                raise FormatError(path, f"negative index {v}", lineno)
            out.append(v)
    return np.array(out, dtype=np.int64)


# -- curve skeletons ----------------------------------------------------------


def load_curve_skeleton(path, fmt=None):
    """Load a curve skeleton from OBJ (``v`` / ``l`` records) or an edge list."""
    fmt = _format_of(path, fmt, ("obj", "edge-list"))
    verts, edges = _read_obj(path) if fmt == "obj" else _read_edge_list(path)
    try:
        return CurveSkeleton(np.array(verts, dtype=np.float64).reshape(-1, 3),
                             np.array(edges, dtype=np.int64).reshape(-1, 2))
    except ValueError as exc:
        raise FormatError(path, str(exc)) from None


def _read_obj(path):
    verts, chains = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            tokens = line.split("#", 1)[0].split()
            if not tokens:
                continue
            if tokens[0] == "v":
                verts.append(_floats(tokens[1:], path, lineno))
            elif tokens[0] == "l":
                if len(tokens) < 3:
                    raise FormatError(path, "line record needs at least two vertices", lineno)
                chains.append((lineno, tokens[1:]))
    edges = []
    n = len(verts)
    for lineno, chain in chains:
        idx = []
        for tok in chain:
            try:
                i = int(tok.split("/")[0])
            except ValueError:
                raise FormatError(path, f"bad vertex index {tok!r}", lineno) from None
            i = i - 1 if i > 0 else n + i
            if not 0 <= i < n:
                raise FormatError(path, f"vertex index {tok} out of range (have {n} vertices)", lineno)
            idx.append(i)
        for a, b in zip(idx[:-1], idx[1:]):
            if a == b:
                raise FormatError(path, f"self-loop at vertex {a + 1}", lineno)
            edges.append((a, b))
    return verts, edges


def _read_edge_list(path):
    with open(path, encoding="utf-8") as fh:
        lines = [(i, ln.split("#", 1)[0].split()) for i, ln in enumerate(fh, 1)]
    lines = [(i, t) for i, t in lines if t]
    if not lines:
        raise FormatError(path, "empty file")
    lineno, head = lines[0]
    try:
        n, m = (int(t) for t in head)
    except ValueError:
        raise FormatError(path, "header must be two integers 'n m'", lineno) from None
    if n < 0 or m < 0 or len(lines) - 1 != n + m:
        raise FormatError(path, f"header promises {n} vertices and {m} edges, found {len(lines) - 1} records",
                          lineno)
    verts = [_floats(t, path, i) for i, t in lines[1:n + 1]]
    edges = []
    for i, t in lines[n + 1:]:
        if len(t) != 2:
            raise FormatError(path, f"edge line needs two indices, got {len(t)}", i)
        try:
            a, b = int(t[0]), int(t[1])
        except ValueError:
            raise FormatError(path, f"bad edge {' '.join(t)!r}", i) from None
        if not (0 <= a < n and 0 <= b < n):
            raise FormatError(path, f"edge ({a}, {b}) references a missing vertex", i)
        if a == b:
            raise FormatError(path, f"self-loop at vertex {a}", i)
        edges.append((a, b))
    return verts, edges


def save_curve_skeleton(path, skeleton, fmt=None):
    """Write a curve skeleton as OBJ (one ``l`` record per edge) or an edge list."""
    fmt = _format_of(path, fmt, ("obj", "edge-list"))
    with open(path, "w", encoding="utf-8") as fh:
        if fmt == "obj":
            for v in skeleton.vertices:
                fh.write(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
            for a, b in skeleton.edges:
                fh.write(f"l {a + 1} {b + 1}\n")
        else:
            fh.write(f"{skeleton.n_vertices} {skeleton.n_edges}\n")
            for v in skeleton.vertices:
                fh.write(f"{v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
            for a, b in skeleton.edges:
                fh.write(f"{a} {b}\n")


# -- reports and diagnostics ---------------------------------------------------


def export_report(report, path):
    """Write the JSON report (sorted keys, no NaN: invalid values become null)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
        fh.write("\n")


def score_colors(values):
    """RGB per score: 0 cold, 0.5 neutral, 1 warm; NaN (invalid) magenta."""
    v = np.asarray(values, dtype=np.float64)
    out = np.empty((v.size, 3), dtype=np.uint8)
    bad = np.isnan(v)
    x = np.clip(np.where(bad, 0.0, v), 0.0, 1.0) * 2.0
    lo = np.minimum(np.floor(x), 1).astype(int)
    frac = (x - lo)[:, None]
    out[:] = np.rint(_RAMP[lo] * (1 - frac) + _RAMP[lo + 1] * frac).astype(np.uint8)
    out[bad] = MAGENTA
    return out


def export_colored_ply(points, values, path):
    """ASCII PLY of points coloured by per-element score."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    colors = score_colors(values)
    if len(colors) != len(pts):
        raise ValueError(f"{len(pts)} points but {len(colors)} scores")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {len(pts)}\n")
        fh.write("property double x\nproperty double y\nproperty double z\n")
        fh.write("property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n")
        for p, c in zip(pts, colors):
            fh.write(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g} {c[0]} {c[1]} {c[2]}\n")


def _extreme_bars(barcode, fraction):
    if fraction is None:
        return np.arange(len(barcode))
    order = np.argsort(barcode.persistence, kind="stable")
    k = max(1, int(math.ceil(fraction * len(order)))) if len(order) else 0
    return np.unique(np.concatenate([order[:k], order[-k:]])) if k else order


def export_barcode_csv(barcode, path, extremes=None):
    """CSV with header ``birth,death,essential``; ``extremes`` keeps the top and bottom fraction."""
    bc = barcode if isinstance(barcode, PersistenceBarcode) else PersistenceBarcode(barcode)
    keep = _extreme_bars(bc, extremes)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("birth,death,essential\n")
        for i in keep:
            fh.write(f"{bc.bars[i, 0]:.17g},{bc.bars[i, 1]:.17g},{int(bc.essential[i])}\n")


def export_barcode_svg(barcodes, path, labels=None, extremes=None, width=640):
    """Horizontal bar plot of one or more barcodes, longest bars at the top of each panel."""
    if isinstance(barcodes, PersistenceBarcode):
        barcodes = [barcodes]
    labels = labels or [f"barcode {i}" for i in range(len(barcodes))]
    xmax = max([float(b.deaths.max()) for b in barcodes if len(b)] + [1e-12])
    margin, row, gap = 60, 6, 28
    body = []
    y = 20
    for bc, label in zip(barcodes, labels):
        keep = _extreme_bars(bc, extremes)
        body.append(f'<text x="4" y="{y + 10}" font-size="12">{label} ({len(keep)} bars)</text>')
        y += 16
        order = keep[np.argsort(-bc.persistence[keep], kind="stable")]
        for i in order:
            x0 = margin + bc.bars[i, 0] / xmax * (width - margin - 10)
            x1 = margin + bc.bars[i, 1] / xmax * (width - margin - 10)
            color = "#b40426" if bc.essential[i] else "#3b4cc0"
            body.append(f'<rect x="{x0:.2f}" y="{y}" width="{max(x1 - x0, 0.5):.2f}" '
                        f'height="{row - 1}" fill="{color}"/>')
            y += row
        y += gap
    axis = (f'<line x1="{margin}" y1="{y - gap + 4}" x2="{width - 10}" y2="{y - gap + 4}" stroke="black"/>'
            f'<text x="{width - 10}" y="{y - gap + 18}" font-size="11" text-anchor="end">{xmax:.4g}</text>'
            f'<text x="{margin}" y="{y - gap + 18}" font-size="11">0</text>')
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{y + 10}">\n')
        fh.write("\n".join(body + [axis]))
        fh.write("\n</svg>\n")


def export_sphere_coverage(coverage, path):
    """PLY of the unit directions and the triangles that survived pruning."""
    tri = coverage.triangles[coverage.kept]
    d = coverage.directions
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("ply\nformat ascii 1.0\ncomment direction-sphere coverage\n")
        fh.write(f"element vertex {len(d)}\nproperty double x\nproperty double y\nproperty double z\n")
        fh.write(f"element face {len(tri)}\nproperty list uchar int vertex_indices\nend_header\n")
        for p in d:
            fh.write(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}\n")
        for t in tri:
            fh.write(f"3 {t[0]} {t[1]} {t[2]}\n")


def export_cross_sections(sections, path):
    """CSV of cross-sections: ``point`` rows hold projected slab points, ``ellipse`` rows the fit."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("sample,record,x,y,semi_major,semi_minor,method\n")
        for i, sec in enumerate(sections):
            if sec is None:
                continue
            for x, y in sec.planar:
                fh.write(f"{i},point,{x:.17g},{y:.17g},,,\n")
            if sec.ellipse is not None:
                e = sec.ellipse
                fh.write(f"{i},ellipse,{e.center[0]:.17g},{e.center[1]:.17g},"
                         f"{e.semi_major:.17g},{e.semi_minor:.17g},{e.method}\n")


def load_report(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
