"""Mesh generators: flat torus, icosphere, and a genus-2 voxel block."""

from __future__ import annotations

import numpy as np

from .mesh import MeshError, TriangleMesh

TWO_PI = 2.0 * np.pi


def flat_torus(n):
    """Exactly flat genus-1 mesh: n x n grid on [0,1)^2 with diagonal split.

    Metric quantities come from the flat plane charts (edge lengths h and
    h*sqrt(2) exactly).  The embedding is the isometric R^4 map
    (cos 2pi x, sin 2pi x, cos 2pi y, sin 2pi y) / 2pi, which is smooth and
    periodic, so embedding-coordinate functions never see the seam.

    n must be a power of two (>= 4) to keep the mesh compatible with the
    grid-based Fourier checks.
    """
    if n < 4 or (n & (n - 1)) != 0:
        raise MeshError(f"flat_torus size must be a power of two >= 4, got {n}")
    h = 1.0 / n
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    x = ii.ravel() * h
    y = jj.ravel() * h
    plane = np.stack([x, y], axis=1)
    verts = np.stack(
        [np.cos(TWO_PI * x), np.sin(TWO_PI * x), np.cos(TWO_PI * y), np.sin(TWO_PI * y)],
        axis=1,
    ) / TWO_PI

    def vid(i, j):
        return (i % n) * n + (j % n)

    faces = []
    corners = []
    for i in range(n):
        for j in range(n):
            a, b = i * h, j * h
            # lower triangle (i,j) (i+1,j) (i+1,j+1); upper (i,j) (i+1,j+1) (i,j+1)
            faces.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))
            corners.append(((a, b), (a + h, b), (a + h, b + h)))
            faces.append((vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)))
            corners.append(((a, b), (a + h, b + h), (a, b + h)))
    corners = np.asarray(corners, float)

    mesh = TriangleMesh(verts, np.asarray(faces), plane_corners=corners,
                        plane_coords=plane, plane_period=1.0)

    # analytic ambient frames at face barycenters, aligned with the chart axes
    bary = corners.mean(axis=1)
    dx = np.stack([-np.sin(TWO_PI * bary[:, 0]), np.cos(TWO_PI * bary[:, 0]),
                   np.zeros(len(bary)), np.zeros(len(bary))], axis=1)
    dy = np.stack([np.zeros(len(bary)), np.zeros(len(bary)),
                   -np.sin(TWO_PI * bary[:, 1]), np.cos(TWO_PI * bary[:, 1])], axis=1)
    e1 = corners[:, 1] - corners[:, 0]
    u = e1 / np.linalg.norm(e1, axis=1)[:, None]
    E1 = u[:, :1] * dx + u[:, 1:] * dy
    E2 = -u[:, 1:] * dx + u[:, :1] * dy
    mesh.set_frames(np.stack([E1, E2], axis=1))

    # exact vertex tangent frames from the embedding differential
    vdx = np.stack([-np.sin(TWO_PI * x), np.cos(TWO_PI * x), 0 * x, 0 * x], axis=1)
    vdy = np.stack([0 * y, 0 * y, -np.sin(TWO_PI * y), np.cos(TWO_PI * y)], axis=1)
    mesh.vertex_frames = np.stack([vdx, vdy], axis=1)
    return mesh


_ICO_LEVEL_CAP = 7


def icosahedron():
    """The unit icosahedron: 12 vertices, 30 edges, 20 faces."""
    p = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        (-1, p, 0), (1, p, 0), (-1, -p, 0), (1, -p, 0),
        (0, -1, p), (0, 1, p), (0, -1, -p), (0, 1, -p),
        (p, 0, -1), (p, 0, 1), (-p, 0, -1), (-p, 0, 1),
    ], dtype=float)
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = np.array([
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ], dtype=np.int64)
    return verts, faces


def icosphere(level):
    """Unit sphere mesh via icosahedron subdivision with midpoint projection.

    Level L gives 10 * 4**L + 2 vertices.  Levels above 7 are refused (the
    meshes stop being useful long before the memory runs out).
    """
    if not 0 <= level <= _ICO_LEVEL_CAP:
        raise MeshError(f"icosphere level must be in [0, {_ICO_LEVEL_CAP}], got {level}")
    verts, faces = icosahedron()
    for _ in range(level):
        verts, faces = _subdivide(verts, faces)
    return TriangleMesh(verts, faces)


def _subdivide(verts, faces):
    verts = list(map(tuple, verts))
    cache = {}

    def midpoint(a, b):
        key = (min(a, b), max(a, b))
        if key not in cache:
            p = np.asarray(verts[a]) + np.asarray(verts[b])
            p /= np.linalg.norm(p)
            cache[key] = len(verts)
            verts.append(tuple(p))
        return cache[key]

    out = []
    for a, b, c in faces:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        out.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
    return np.asarray(verts, float), np.asarray(out, dtype=np.int64)


def genus2_block(refine=2):
    """Genus-2 surface: boundary of a 5x3x1 voxel plate with two square tunnels.

    All-right-angle geometry, used for homology tests; `refine` subdivides each
    voxel into refine^3 cells for a finer mesh of the same topology.
    """
    base = np.ones((5, 3, 1), dtype=bool)
    base[1, 1, 0] = False
    base[3, 1, 0] = False
    occ = base.repeat(refine, 0).repeat(refine, 1).repeat(refine, 2)
    return voxel_surface(occ)


# quad corner offsets for each outward direction, counterclockwise from outside
_QUADS = {
    (1, 0, 0): ((1, 0, 0), (1, 1, 0), (1, 1, 1), (1, 0, 1)),
    (-1, 0, 0): ((0, 0, 0), (0, 0, 1), (0, 1, 1), (0, 1, 0)),
    (0, 1, 0): ((0, 1, 0), (0, 1, 1), (1, 1, 1), (1, 1, 0)),
    (0, -1, 0): ((0, 0, 0), (1, 0, 0), (1, 0, 1), (0, 0, 1)),
    (0, 0, 1): ((0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1)),
    (0, 0, -1): ((0, 0, 0), (0, 1, 0), (1, 1, 0), (1, 0, 0)),
}


def voxel_surface(occupancy):
    """Triangulated boundary surface of a boolean voxel array."""
    occ = np.asarray(occupancy, dtype=bool)
    vid = {}
    verts = []

    def corner(p):
        if p not in vid:
            vid[p] = len(verts)
            verts.append(p)
        return vid[p]

    faces = []
    filled = np.argwhere(occ)
    for x, y, z in filled:
        for d, quad in _QUADS.items():
            nb = (x + d[0], y + d[1], z + d[2])
            inside = (0 <= nb[0] < occ.shape[0] and 0 <= nb[1] < occ.shape[1]
                      and 0 <= nb[2] < occ.shape[2])
            if inside and occ[nb]:
                continue
            ids = [corner((x + o[0], y + o[1], z + o[2])) for o in quad]
            faces.append((ids[0], ids[1], ids[2]))
            faces.append((ids[0], ids[2], ids[3]))
    return TriangleMesh(np.asarray(verts, float), np.asarray(faces, dtype=np.int64))
