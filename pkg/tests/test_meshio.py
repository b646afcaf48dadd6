from pathlib import Path

import numpy as np
import pytest

from decflow.meshio import load_mesh, read_obj, read_off, write_obj

DATA = Path(__file__).parent / "data"


def test_read_off_icosahedron():
    verts, faces = read_off(DATA / "icosahedron.off")
    assert verts.shape == (12, 3)
    assert faces.shape == (20, 3)
    assert np.allclose(np.linalg.norm(verts, axis=1), 1.0, atol=1e-9)


def test_load_mesh_builds_manifold():
    mesh = load_mesh(DATA / "icosahedron.off")
    assert (mesh.n_vertices, mesh.n_edges, mesh.n_faces) == (12, 30, 20)
    assert mesh.euler_characteristic == 2


def test_load_mesh_rejects_unknown_suffix(tmp_path):
    path = tmp_path / "mesh.xyz"
    path.write_text("")
    with pytest.raises(Exception, match="format"):
        load_mesh(path)


def test_obj_roundtrip(tmp_path, sphere2):
    path = tmp_path / "sphere.obj"
    write_obj(path, sphere2)
    verts, faces = read_obj(path)
    assert np.allclose(verts, sphere2.vertices, atol=1e-12)
    assert np.array_equal(faces, sphere2.faces)
    assert load_mesh(path).n_edges == sphere2.n_edges


def test_obj_negative_indices(tmp_path):
    path = tmp_path / "tri.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n")
    _, faces = read_obj(path)
    assert np.array_equal(faces, [[0, 1, 2]])


def test_off_reader_parses_comments_and_counts(tmp_path, sphere2):
    path = tmp_path / "sphere.off"
    lines = ["OFF", "# hand-written", f"{sphere2.n_vertices} {sphere2.n_faces} 0"]
    lines += [" ".join("%.17g" % c for c in v) for v in sphere2.vertices]
    lines += ["3 %d %d %d" % tuple(f) for f in sphere2.faces]
    path.write_text("\n".join(lines) + "\n")
    verts, faces = read_off(path)
    assert np.allclose(verts, sphere2.vertices, atol=1e-12)
    assert np.array_equal(faces, sphere2.faces)


def test_malformed_off_rejected(tmp_path):
    bad = tmp_path / "bad.off"
    bad.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n")  # missing a vertex row
    with pytest.raises(Exception):
        read_off(bad)


def test_off_requires_header(tmp_path):
    bad = tmp_path / "noheader.off"
    bad.write_text("4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n")
    with pytest.raises(Exception, match="OFF"):
        read_off(bad)


def test_obj_rejects_quads(tmp_path):
    bad = tmp_path / "quad.obj"
    bad.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    with pytest.raises(Exception, match="triangles"):
        read_obj(bad)
