"""Closed oriented triangle meshes with the precomputed structure used everywhere else.

A :class:`TriangleMesh` owns the combinatorics (oriented edges, signed incidence
matrices) and the metric data (intrinsic per-face charts, circumcentric edge
weights, lumped vertex areas) needed for discrete exterior calculus.  Meshes are
treated as immutable once built: all derived arrays are computed in the
constructor or cached lazily, and the vertex/face arrays are marked read-only.

Vertices live in R^m.  m is 3 for ordinary embedded surfaces; the flat-torus
generator uses an isometric m=4 embedding and supplies intrinsic plane charts,
so all metric quantities remain exactly flat (see ``meshgen.flat_torus``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp


class MeshError(ValueError):
    """Raised when input data does not describe a closed oriented triangle mesh."""


def _canonical_edges(faces):
    """Return (edges, face_edges, face_edge_signs) for oriented triangle faces.

    Edges are stored once each as (u, v) with u < v; the stored orientation is
    u -> v.  face_edges[f, k] is the edge id of the face boundary segment from
    corner k to corner k+1, and face_edge_signs[f, k] is +1 when the face
    traverses the edge in storage direction.
    """
    f = np.asarray(faces)
    tails = f[:, [0, 1, 2]].ravel()
    heads = f[:, [1, 2, 0]].ravel()
    lo = np.minimum(tails, heads)
    hi = np.maximum(tails, heads)
    key = lo.astype(np.int64) * (f.max() + 1) + hi
    uniq, inverse = np.unique(key, return_inverse=True)
    nedges = len(uniq)
    edges = np.empty((nedges, 2), dtype=np.int64)
    edges[inverse, 0] = lo
    edges[inverse, 1] = hi
    face_edges = inverse.reshape(-1, 3)
    signs = np.where(tails < heads, 1, -1).reshape(-1, 3).astype(np.int8)
    return edges, face_edges, signs


def _orientation_consistent(faces):
    """True when every edge is traversed once in each direction (vectorized check)."""
    edges, face_edges, signs = _canonical_edges(faces)
    counts = np.zeros(len(edges), dtype=np.int64)
    np.add.at(counts, face_edges.ravel(), 1)
    if not np.all(counts == 2):
        return False
    sign_sum = np.zeros(len(edges), dtype=np.int64)
    np.add.at(sign_sum, face_edges.ravel(), signs.ravel())
    return bool(np.all(sign_sum == 0))


def orient_faces(faces, nv):
    """Flip faces so adjacent faces induce opposite orientations on shared edges.

    Returns the repaired face array.  Raises MeshError when no consistent
    orientation exists (non-orientable input) or an edge has more than two
    incident faces.
    """
    faces = np.array(faces, dtype=np.int64, copy=True)
    nf = len(faces)
    edge_map = {}
    for fi, (a, b, c) in enumerate(faces):
        for u, v in ((a, b), (b, c), (c, a)):
            edge_map.setdefault((min(u, v), max(u, v)), []).append(fi)
    for e, fs in edge_map.items():
        if len(fs) != 2:
            raise MeshError(
                f"edge {e} has {len(fs)} incident faces; need exactly 2 (closed manifold)"
            )
    adjacency = {}
    for e, (f1, f2) in edge_map.items():
        adjacency.setdefault(f1, []).append((f2, e))
        adjacency.setdefault(f2, []).append((f1, e))

    def directed(fi, e):
        a, b, c = faces[fi]
        for u, v in ((a, b), (b, c), (c, a)):
            if (min(u, v), max(u, v)) == e:
                return (u, v)
        raise AssertionError

    seen = np.zeros(nf, dtype=bool)
    for root in range(nf):
        if seen[root]:
            continue
        seen[root] = True
        stack = [root]
        while stack:
            fi = stack.pop()
            for gj, e in adjacency[fi]:
                agree = directed(fi, e) == directed(gj, e)
                if not seen[gj]:
                    if agree:  # same direction twice => flip the neighbor
                        faces[gj] = faces[gj][::-1]
                    seen[gj] = True
                    stack.append(gj)
                elif agree:
                    raise MeshError("mesh is non-orientable; orientation repair failed")
    return faces


@dataclass
class ValidityReport:
    """Plain-text summary of mesh checks; str() gives the printable report."""

    n_vertices: int
    n_edges: int
    n_faces: int
    euler_characteristic: int
    genus: int
    area_total: float
    area_min: float
    edge_len_min: float
    edge_len_max: float
    n_floored_edge_stars: int
    connected: bool

    def __str__(self):
        lines = [
            "mesh validity report",
            f"  vertices {self.n_vertices}  edges {self.n_edges}  faces {self.n_faces}",
            f"  euler characteristic {self.euler_characteristic}  genus {self.genus}",
            f"  total area {self.area_total:.12g}  min face area {self.area_min:.3g}",
            f"  edge length range [{self.edge_len_min:.3g}, {self.edge_len_max:.3g}]",
            f"  edge stars floored for positivity: {self.n_floored_edge_stars}",
            f"  connected: {self.connected}",
        ]
        return "\n".join(lines)


class TriangleMesh:
    """Closed, oriented, connected triangle mesh with DEC structure.

    Parameters
    ----------
    vertices : (V, m) float array
        Embedding coordinates.
    faces : (F, 3) int array
        Oriented triangles (counterclockwise with respect to the surface
        orientation).  Inconsistent orientations are repaired by face flips
        when possible.
    plane_corners : (F, 3, 2) float array, optional
        Intrinsic planar positions of each face's corners.  When given, all
        metric quantities (lengths, areas, cotangents) come from these charts
        instead of the embedding; used by the flat-torus generator.
    plane_coords : (V, 2) float array, optional
        Global periodic plane coordinates of vertices (flat torus only).
    plane_period : float, optional
        Period of the plane chart in each axis (flat torus only).
    """

    def __init__(self, vertices, faces, plane_corners=None, plane_coords=None,
                 plane_period=None):
        vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        if vertices.ndim != 2 or vertices.shape[1] < 2:
            raise MeshError("vertices must be a (V, m) array with m >= 2")
        faces = np.asarray(faces, dtype=np.int64)
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise MeshError("faces must be a (F, 3) array of vertex indices")
        if faces.min(initial=0) < 0 or faces.max(initial=-1) >= len(vertices):
            raise MeshError("face indices out of range")
        if len(np.unique(faces)) != len(vertices):
            raise MeshError("mesh has isolated vertices")

        if not _orientation_consistent(faces):
            faces = orient_faces(faces, len(vertices))
        self.vertices = vertices
        self.faces = faces
        self.edges, self.face_edges, self.face_edge_signs = _canonical_edges(faces)

        self._check_closed_manifold()

        self.plane_coords = None if plane_coords is None else np.asarray(plane_coords, float)
        self.plane_period = plane_period
        if plane_corners is not None:
            corners_amb = None
            self.plane_corners = np.ascontiguousarray(plane_corners, dtype=np.float64)
        else:
            corners_amb = self.vertices[self.faces]  # (F, 3, m)
            self.plane_corners = None

        self._build_charts(corners_amb)
        self._build_metric()
        self._build_incidence()

        self.vertices.setflags(write=False)
        self.faces.setflags(write=False)

    # -- combinatorics ------------------------------------------------------

    def _check_closed_manifold(self):
        ne = len(self.edges)
        counts = np.zeros(ne, dtype=np.int64)
        np.add.at(counts, self.face_edges.ravel(), 1)
        if not np.all(counts == 2):
            bad = np.flatnonzero(counts != 2)[:5]
            raise MeshError(f"edges {bad.tolist()} are not shared by exactly two faces")
        # consistent orientation: each edge traversed once in each direction
        sign_sum = np.zeros(ne, dtype=np.int64)
        np.add.at(sign_sum, self.face_edges.ravel(), self.face_edge_signs.ravel())
        if not np.all(sign_sum == 0):
            raise MeshError("orientation inconsistency survived repair")
        # connectivity over the vertex graph
        g = sp.coo_matrix(
            (np.ones(len(self.edges)), (self.edges[:, 0], self.edges[:, 1])),
            shape=(len(self.vertices),) * 2,
        )
        ncomp = sp.csgraph.connected_components(g, directed=False, return_labels=False)
        if ncomp != 1:
            raise MeshError(f"mesh has {ncomp} connected components; need 1")

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def ambient_dim(self):
        return self.vertices.shape[1]

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def genus(self):
        chi = self.euler_characteristic
        if chi % 2 != 0 or chi > 2:
            raise MeshError(f"euler characteristic {chi} is not that of a closed surface")
        return (2 - chi) // 2

    # -- per-face charts ----------------------------------------------------

    def _build_charts(self, corners_amb):
        """Per-face orthonormal 2D charts: first edge direction, then its +90 rotation."""
        F = self.n_faces
        m = self.ambient_dim
        if self.plane_corners is not None:
            # intrinsic input: rotate each chart so corner0 sits at the origin
            # and the first edge runs along +x, matching the embedded convention.
            pc = self.plane_corners
            e1 = pc[:, 1] - pc[:, 0]
            l1 = np.linalg.norm(e1, axis=1)
            u = e1 / l1[:, None]
            rot = np.stack([np.stack([u[:, 0], u[:, 1]], axis=1),
                            np.stack([-u[:, 1], u[:, 0]], axis=1)], axis=1)
            rel = pc - pc[:, :1]
            self.corners2d = np.einsum("fij,fkj->fki", rot, rel)
            # ambient frame via the embedding differential is supplied by the
            # generator (torus); fall back to chart axes padded with zeros.
            self.frames = getattr(self, "frames", None)
        else:
            p0, p1, p2 = corners_amb[:, 0], corners_amb[:, 1], corners_amb[:, 2]
            e1 = p1 - p0
            l1 = np.linalg.norm(e1, axis=1)
            if np.any(l1 == 0):
                raise MeshError("degenerate face with coincident corners")
            u = e1 / l1[:, None]
            w = p2 - p0
            wt = w - (w * u).sum(1)[:, None] * u
            l2 = np.linalg.norm(wt, axis=1)
            if np.any(l2 == 0):
                raise MeshError("degenerate (collinear) face")
            v = wt / l2[:, None]
            self.frames = np.stack([u, v], axis=1)  # (F, 2, m)
            x2 = (w * u).sum(1)
            y2 = (w * v).sum(1)
            self.corners2d = np.zeros((F, 3, 2))
            self.corners2d[:, 1, 0] = l1
            self.corners2d[:, 2, 0] = x2
            self.corners2d[:, 2, 1] = y2

    def set_frames(self, frames):
        """Install ambient frame vectors (used by generators with analytic charts)."""
        frames = np.asarray(frames, float)
        if frames.shape != (self.n_faces, 2, self.ambient_dim):
            raise MeshError("frames must have shape (F, 2, m)")
        self.frames = frames

    # -- metric -------------------------------------------------------------

    def _build_metric(self):
        c = self.corners2d
        d01 = c[:, 1] - c[:, 0]
        d02 = c[:, 2] - c[:, 0]
        cross = d01[:, 0] * d02[:, 1] - d01[:, 1] * d02[:, 0]
        if np.any(cross <= 0):
            raise MeshError("face chart with non-positive area (orientation bug)")
        self.face_areas = 0.5 * cross
        self.total_area = float(self.face_areas.sum())

        # lumped (barycentric) vertex areas
        mass = np.zeros(self.n_vertices)
        np.add.at(mass, self.faces.ravel(), np.repeat(self.face_areas / 3.0, 3))
        self.vertex_areas = mass

        # cotangents of the three corner angles, per face
        cots = np.empty((self.n_faces, 3))
        for k in range(3):
            a = c[:, k]
            b = c[:, (k + 1) % 3]
            d = c[:, (k + 2) % 3]
            u = b - a
            v = d - a
            dot = (u * v).sum(1)
            crs = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
            cots[:, k] = dot / crs
        self.corner_cotans = cots

        # circumcentric edge stars: |dual edge| / |primal edge| = (cot a + cot b) / 2.
        # the cotangent opposite the boundary segment (corner k -> k+1) sits at corner k+2.
        raw = np.zeros(self.n_edges)
        np.add.at(raw, self.face_edges.ravel(), 0.5 * cots[:, [2, 0, 1]].ravel())
        self.edge_star_raw = raw
        # Weakly-Delaunay meshes can have exактно-zero entries (cocircular pairs,
        # e.g. the right-triangle grid); floor them at a tiny power of two so the
        # star stays invertible.  The floor is far below discretization error.
        pos = raw[raw > 0]
        if len(pos) == 0:
            raise MeshError("no positive edge stars; mesh is badly non-Delaunay")
        floor = 2.0 ** np.ceil(np.log2(1e-12 * np.median(pos)))
        self.edge_stars = np.maximum(raw, floor)
        self.n_floored_stars = int((raw < floor).sum())

        el = np.linalg.norm(c[:, [1, 2, 0]] - c[:, [0, 1, 2]], axis=2)
        lens = np.zeros(self.n_edges)
        lens[self.face_edges.ravel()] = el.ravel()
        self.edge_lengths = lens

    # -- incidence ----------------------------------------------------------

    def _build_incidence(self):
        E, V, F = self.n_edges, self.n_vertices, self.n_faces
        rows = np.repeat(np.arange(E), 2)
        cols = self.edges.ravel()
        vals = np.tile(np.array([-1.0, 1.0]), E)
        self.d0 = sp.csr_matrix((vals, (rows, cols)), shape=(E, V))
        rows = np.repeat(np.arange(F), 3)
        self.d1 = sp.csr_matrix(
            (self.face_edge_signs.ravel().astype(float),
             (rows, self.face_edges.ravel())),
            shape=(F, E),
        )

    @cached_property
    def stiffness(self):
        """Cotangent stiffness matrix d0^T diag(edge_stars) d0 (V x V, SPD + constants)."""
        W = sp.diags(self.edge_stars)
        return (self.d0.T @ W @ self.d0).tocsc()

    @cached_property
    def edge_faces(self):
        """``edge_faces[e] = (left, right)``: left face traverses edge e positively."""
        ef = np.full((self.n_edges, 2), -1, dtype=np.int64)
        for k in range(3):
            eids = self.face_edges[:, k]
            sgn = self.face_edge_signs[:, k]
            fs = np.arange(self.n_faces)
            ef[eids[sgn > 0], 0] = fs[sgn > 0]
            ef[eids[sgn < 0], 1] = fs[sgn < 0]
        assert (ef >= 0).all()
        return ef

    @cached_property
    def vertex_frames(self):
        """(V, 2, m) orthonormal tangent pairs at vertices, from 1-ring edge spans."""
        V, m = self.n_vertices, self.ambient_dim
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        G = np.zeros((V, m, m))
        outer = d[:, :, None] * d[:, None, :]
        np.add.at(G, self.edges[:, 0], outer)
        np.add.at(G, self.edges[:, 1], outer)
        w, vecs = np.linalg.eigh(G)
        # top-two eigenvectors span the tangent plane
        return np.stack([vecs[:, :, -1], vecs[:, :, -2]], axis=1)

    def validity_report(self):
        el = self.edge_lengths
        return ValidityReport(
            n_vertices=self.n_vertices,
            n_edges=self.n_edges,
            n_faces=self.n_faces,
            euler_characteristic=self.euler_characteristic,
            genus=self.genus,
            area_total=self.total_area,
            area_min=float(self.face_areas.min()),
            edge_len_min=float(el.min()),
            edge_len_max=float(el.max()),
            n_floored_edge_stars=self.n_floored_stars,
            connected=True,
        )

    # -- point utilities ----------------------------------------------------

    def barycentric_matrices(self):
        """(F, 3, 3) matrices G with bary = G @ (x, y, 1) in the face chart."""
        if not hasattr(self, "_bary_mats"):
            F = self.n_faces
            A = np.empty((F, 3, 3))
            A[:, :2, :] = self.corners2d.transpose(0, 2, 1)
            A[:, 2, :] = 1.0
            self._bary_mats = np.linalg.inv(A)
        return self._bary_mats

    def chart_point(self, face, bary):
        """Chart (2D) coordinates of barycentric points; face and bary are arrays."""
        return np.einsum("fkx,fk->fx", self.corners2d[face], bary)

    def ambient_point(self, face, bary):
        """Embedding-space positions of barycentric points (linear in the face)."""
        return np.einsum("fkx,fk->fx", self.vertices[self.faces[face]], bary)
