import numpy as np
import pytest

from decflow.mesh import TriangleMesh
from decflow.meshgen import flat_torus, genus2_block, icosphere


def test_flat_torus_4_euler_count():
    mesh = flat_torus(4)
    assert mesh.n_vertices == 16
    assert mesh.n_edges == 48
    assert mesh.n_faces == 32
    assert mesh.euler_characteristic == 0
    assert mesh.genus == 1


def test_icosphere_0_is_icosahedron():
    mesh = icosphere(0)
    assert (mesh.n_vertices, mesh.n_edges, mesh.n_faces) == (12, 30, 20)
    assert mesh.euler_characteristic == 2
    assert mesh.genus == 0
    assert np.allclose(np.linalg.norm(mesh.vertices, axis=1), 1.0, atol=1e-12)


def test_icosphere_vertex_count_formula():
    for level in range(4):
        assert icosphere(level).n_vertices == 10 * 4 ** level + 2


def test_icosphere_level_cap():
    with pytest.raises(Exception, match="level"):
        icosphere(9)


def test_genus2_counts(genus2):
    assert genus2.euler_characteristic == -2
    assert genus2.genus == 2


def test_flat_torus_total_area_and_uniformity(torus16):
    assert torus16.total_area == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(torus16.face_areas, 0.5 / 16 ** 2, atol=1e-15)
    assert np.allclose(torus16.vertex_areas, 1.0 / 16 ** 2, atol=1e-15)
    assert torus16.vertex_areas.sum() == pytest.approx(torus16.total_area,
                                                       rel=1e-12)


def test_sphere_area_converges(sphere3):
    assert sphere3.total_area == pytest.approx(4.0 * np.pi, rel=0.01)


def test_tetrahedron_hand_oracle():
    verts = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, -1.0],
                      [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]])
    faces = np.array([[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])
    mesh = TriangleMesh(verts, faces)
    assert (mesh.n_vertices, mesh.n_edges, mesh.n_faces) == (4, 6, 4)
    assert mesh.euler_characteristic == 2
    # regular tetrahedron: all edges and faces congruent
    assert np.allclose(mesh.edge_lengths, mesh.edge_lengths[0], rtol=1e-12)
    assert np.allclose(mesh.face_areas, mesh.face_areas[0], rtol=1e-12)
    assert mesh.vertex_areas.sum() == pytest.approx(mesh.total_area, rel=1e-12)
    # incidence: every d0 row is one +1 and one -1; d1 rows have 3 entries
    d0 = mesh.d0.toarray()
    assert np.all(np.sort(d0, axis=1)[:, :1] == -1)
    assert np.all((d0 != 0).sum(axis=1) == 2)
    assert np.all(d0.sum(axis=1) == 0)
    d1 = mesh.d1.toarray()
    assert np.all((d1 != 0).sum(axis=1) == 3)
    assert np.all(np.isin(d1, (-1, 0, 1)))


def test_incidence_structure_small_torus(torus8):
    d0, d1 = torus8.d0, torus8.d1
    assert d0.shape == (torus8.n_edges, torus8.n_vertices)
    assert d1.shape == (torus8.n_faces, torus8.n_edges)
    dd = d1 @ d0
    assert dd.nnz == 0 or np.abs(dd.data).max() == 0
    # closed manifold: every edge sits in exactly two faces, opposite signs
    per_edge = np.abs(d1).sum(axis=0).A1
    assert np.all(per_edge == 2)
    assert np.all(np.asarray(d1.sum(axis=0)).ravel() == 0)


def test_frames_orthonormal(torus16, sphere2):
    for mesh in (torus16, sphere2):
        g = np.einsum("fim,fjm->fij", mesh.frames, mesh.frames)
        assert np.allclose(g, np.eye(2), atol=1e-12)


def test_plane_coordinates_only_on_torus(torus16, sphere2):
    assert torus16.plane_coords is not None
    assert torus16.plane_corners is not None
    assert sphere2.plane_coords is None
    assert np.all((torus16.plane_coords >= 0) & (torus16.plane_coords < 1))


def test_non_manifold_rejected():
    # three faces sharing one edge
    verts = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0],
                      [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]])
    faces = np.array([[0, 1, 2], [0, 1, 3], [0, 1, 4]])
    with pytest.raises(Exception):
        TriangleMesh(verts, faces)


def test_validity_report_clean(torus16, sphere2, genus2):
    for mesh in (torus16, sphere2, genus2):
        report = mesh.validity_report()
        assert report.connected
        assert report.n_vertices == mesh.n_vertices
        assert report.area_total == pytest.approx(mesh.total_area, rel=1e-12)
        assert report.area_min > 0
        assert report.edge_len_min > 0
