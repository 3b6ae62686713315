import json
import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from skelscore.geometry import CurveSkeleton, PersistenceBarcode
from skelscore.io import (
    MAGENTA,
    FormatError,
    export_barcode_csv,
    export_barcode_svg,
    export_colored_ply,
    export_cross_sections,
    export_sphere_coverage,
    load_curve_skeleton,
    load_indices,
    load_point_cloud,
    save_curve_skeleton,
    save_point_cloud,
    score_colors,
)
from skelscore.boundedness import sphere_coverage
from skelscore.centeredness import cross_section
from skelscore.synth import fibonacci_sphere

coords = arrays(np.float64, st.tuples(st.integers(1, 40), st.just(3)),
                elements=st.floats(-1e6, 1e6, allow_nan=False))


def write(path, text):
    path.write_text(text)
    return path


class TestXYZ:
    def test_three_lines(self, tmp_path):
        c = load_point_cloud(write(tmp_path / "a.xyz", "0 0 0\n1 2 3\n# note\n\n4 5 6 7\n"))
        np.testing.assert_array_equal(c.points, [[0, 0, 0], [1, 2, 3], [4, 5, 6]])

    def test_short_row(self, tmp_path):
        with pytest.raises(FormatError) as err:
            load_point_cloud(write(tmp_path / "a.xyz", "0 0 0\n1 2\n"))
        assert err.value.line == 2

    def test_not_a_number(self, tmp_path):
        with pytest.raises(FormatError, match=":1:"):
            load_point_cloud(write(tmp_path / "a.xyz", "0 x 0\n"))

    def test_empty(self, tmp_path):
        with pytest.raises(FormatError):
            load_point_cloud(write(tmp_path / "a.xyz", "\n"))

    @given(coords)
    def test_round_trip(self, tmp_path_factory, pts):
        path = tmp_path_factory.mktemp("xyz") / "c.xyz"
        save_point_cloud(path, pts)
        np.testing.assert_allclose(load_point_cloud(path).points, pts, rtol=1e-7, atol=1e-7)


class TestPLY:
    def test_binary_4096(self, tmp_path):
        pts = fibonacci_sphere(4096)
        save_point_cloud(tmp_path / "s.ply", pts, binary=True)
        out = load_point_cloud(tmp_path / "s.ply").points
        assert out.shape == (4096, 3)
        np.testing.assert_array_equal(out, pts)

    @given(coords)
    def test_round_trips(self, tmp_path_factory, pts):
        d = tmp_path_factory.mktemp("ply")
        save_point_cloud(d / "b.ply", pts, binary=True)
        np.testing.assert_array_equal(load_point_cloud(d / "b.ply").points, pts)
        save_point_cloud(d / "a.ply", pts)
        np.testing.assert_allclose(load_point_cloud(d / "a.ply").points, pts, rtol=1e-7, atol=1e-7)

    def test_float32_with_extra_properties(self, tmp_path):
        header = ("ply\nformat binary_little_endian 1.0\ncomment made by hand\n"
                  "element vertex 2\nproperty float x\nproperty float y\nproperty float z\n"
                  "property uchar red\nproperty float nx\n"
                  "element face 1\nproperty list uchar int vertex_indices\nend_header\n")
        body = struct.pack("<fffBf", 1, 2, 3, 255, 0.5) + struct.pack("<fffBf", 4, 5, 6, 0, 0.5)
        body += struct.pack("<Biii", 3, 0, 1, 1)
        (tmp_path / "v.ply").write_bytes(header.encode() + body)
        np.testing.assert_array_equal(load_point_cloud(tmp_path / "v.ply").points, [[1, 2, 3], [4, 5, 6]])

    def test_ascii_with_faces(self, tmp_path):
        text = ("ply\nformat ascii 1.0\nelement vertex 3\nproperty double x\nproperty double y\n"
                "property double z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n"
                "0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
        assert load_point_cloud(write(tmp_path / "f.ply", text)).points.shape == (3, 3)

    def test_big_endian(self, tmp_path):
        header = ("ply\nformat binary_big_endian 1.0\nelement vertex 1\n"
                  "property double x\nproperty double y\nproperty double z\nend_header\n")
        (tmp_path / "b.ply").write_bytes(header.encode() + struct.pack(">ddd", 1, 2, 3))
        np.testing.assert_array_equal(load_point_cloud(tmp_path / "b.ply").points, [[1, 2, 3]])

    @pytest.mark.parametrize("text,line", [
        ("plx\n", 1),
        ("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nend_header\n0\n", None),
        ("ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
         "property float z\nend_header\n0 0 0\n1 1\n", 9),
        ("ply\nformat ascii 1.0\nelement vertex 1\nproperty quad x\nend_header\n", 4),
        ("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\n", 5),
    ])
    def test_malformed(self, tmp_path, text, line):
        with pytest.raises(FormatError) as err:
            load_point_cloud(write(tmp_path / "m.ply", text))
        assert err.value.line == line

    def test_truncated_binary(self, tmp_path):
        header = ("ply\nformat binary_little_endian 1.0\nelement vertex 3\n"
                  "property float x\nproperty float y\nproperty float z\nend_header\n")
        (tmp_path / "t.ply").write_bytes(header.encode() + b"\0" * 20)
        with pytest.raises(FormatError, match="offset"):
            load_point_cloud(tmp_path / "t.ply")

    def test_unknown_extension(self, tmp_path):
        with pytest.raises(ValueError):
            load_point_cloud(write(tmp_path / "a.stl", ""))


class TestSkeletonFiles:
    def test_obj_chain(self, tmp_path):
        text = "# curve\nv 0 0 0\nv 1 0 0\nv 2 0 0\nvn 0 0 1\nl 1 2 3\n"
        sk = load_curve_skeleton(write(tmp_path / "c.obj", text))
        assert sk.edges.tolist() == [[0, 1], [1, 2]]

    def test_obj_negative_indices(self, tmp_path):
        sk = load_curve_skeleton(write(tmp_path / "c.obj", "v 0 0 0\nv 1 0 0\nl -2 -1\n"))
        assert sk.edges.tolist() == [[0, 1]]

    def test_obj_self_loop(self, tmp_path):
        with pytest.raises(FormatError, match="self-loop"):
            load_curve_skeleton(write(tmp_path / "c.obj", "v 0 0 0\nl 1 1\n"))

    def test_obj_dangling(self, tmp_path):
        with pytest.raises(FormatError) as err:
            load_curve_skeleton(write(tmp_path / "c.obj", "v 0 0 0\nv 1 0 0\nl 1 3\n"))
        assert err.value.line == 3

    def test_edge_list(self, tmp_path):
        sk = load_curve_skeleton(write(tmp_path / "c.edges", "2 1\n0 0 0\n1 0 0\n0 1\n"))
        assert sk.n_vertices == 2 and sk.edges.tolist() == [[0, 1]]

    @pytest.mark.parametrize("text", ["2 1\n0 0 0\n1 0 0\n0 2\n", "2 1\n0 0 0\n1 0 0\n1 1\n",
                                      "2 2\n0 0 0\n1 0 0\n0 1\n", "x y\n"])
    def test_edge_list_errors(self, tmp_path, text):
        with pytest.raises(FormatError):
            load_curve_skeleton(write(tmp_path / "c.edges", text))

    @pytest.mark.parametrize("name", ["s.obj", "s.edges"])
    def test_round_trip(self, tmp_path, name):
        sk = CurveSkeleton(np.random.default_rng(0).normal(size=(5, 3)), [[0, 1], [1, 2], [1, 3], [3, 4]])
        save_curve_skeleton(tmp_path / name, sk)
        back = load_curve_skeleton(tmp_path / name)
        np.testing.assert_allclose(back.vertices, sk.vertices, rtol=1e-7)
        np.testing.assert_array_equal(back.edges, sk.edges)

    def test_indices(self, tmp_path):
        assert load_indices(write(tmp_path / "i.txt", "3\n0\n\n2\n")).tolist() == [3, 0, 2]
        with pytest.raises(FormatError):
            load_indices(write(tmp_path / "j.txt", "1\n-1\n"))


class TestExports:
    def test_colors(self):
        c = score_colors([0.0, 0.5, 1.0, np.nan])
        assert c[0].tolist() == [59, 76, 192]
        assert c[1].tolist() == [221, 221, 221]
        assert c[2].tolist() == [180, 4, 38]
        assert tuple(c[3]) == MAGENTA

    def test_colored_ply(self, tmp_path):
        export_colored_ply(np.eye(3), [1.0, np.nan, 0.2], tmp_path / "c.ply")
        lines = (tmp_path / "c.ply").read_text().splitlines()
        body = lines[lines.index("end_header") + 1:]
        assert body[0].split()[3:] == ["180", "4", "38"]
        assert body[1].split()[3:] == ["255", "0", "255"]
        assert load_point_cloud(tmp_path / "c.ply").points.shape == (3, 3)

    def test_colored_ply_length_mismatch(self, tmp_path):
        with pytest.raises(ValueError):
            export_colored_ply(np.eye(3), [1.0], tmp_path / "c.ply")

    def test_barcode_csv(self, tmp_path):
        export_barcode_csv(PersistenceBarcode([]), tmp_path / "e.csv")
        assert (tmp_path / "e.csv").read_text() == "birth,death,essential\n"
        export_barcode_csv(PersistenceBarcode([[0, 0.5], [0, 1.6]], [False, True]), tmp_path / "b.csv")
        assert (tmp_path / "b.csv").read_text().splitlines()[1:] == ["0,0.5,0", "0,1.6000000000000001,1"]

    def test_barcode_extremes(self, tmp_path):
        bc = PersistenceBarcode([[0, d] for d in np.linspace(0.01, 1, 100)])
        export_barcode_csv(bc, tmp_path / "x.csv", extremes=0.05)
        assert len((tmp_path / "x.csv").read_text().splitlines()) == 1 + 10

    def test_barcode_svg(self, tmp_path):
        bc = PersistenceBarcode([[0, 0.5], [0, 1.6]], [False, True])
        export_barcode_svg([bc, PersistenceBarcode([])], tmp_path / "b.svg", labels=["a", "b"])
        text = (tmp_path / "b.svg").read_text()
        assert text.startswith("<svg") and text.count("<rect") == 2

    def test_coverage_ply(self, tmp_path):
        cov = sphere_coverage([0, 0, 0], fibonacci_sphere(200))
        export_sphere_coverage(cov, tmp_path / "cov.ply")
        text = (tmp_path / "cov.ply").read_text()
        assert f"element face {int(cov.kept.sum())}" in text
        assert load_point_cloud(tmp_path / "cov.ply").points.shape == (200, 3)

    def test_cross_sections(self, tmp_path):
        t = np.linspace(0, 2 * np.pi, 12, endpoint=False)
        ring = np.column_stack([np.cos(t), np.sin(t), np.zeros(12)])
        sec = cross_section(ring, np.zeros(3), np.array([0, 0, 1.0]), 0.1)
        export_cross_sections([sec, None], tmp_path / "s.csv")
        rows = (tmp_path / "s.csv").read_text().splitlines()
        assert rows[0] == "sample,record,x,y,semi_major,semi_minor,method"
        assert sum(r.split(",")[1] == "point" for r in rows[1:]) == 12
        assert rows[-1].startswith("0,ellipse,")
