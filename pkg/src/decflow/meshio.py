"""ASCII OFF / OBJ readers and a small OBJ writer.

Only triangle faces are accepted; anything else (quads, boundary edges,
non-manifold configurations) raises MeshError via the TriangleMesh
constructor or directly here.
"""

from __future__ import annotations

import os

import numpy as np

from .mesh import MeshError, TriangleMesh


def load_mesh(path):
    """Load an OFF or OBJ file (by extension) into a TriangleMesh."""
    ext = os.path.splitext(path)[1].lower()
    if ext == ".off":
        verts, faces = read_off(path)
    elif ext == ".obj":
        verts, faces = read_obj(path)
    else:
        raise MeshError(f"unsupported mesh format {ext!r}; expected .off or .obj")
    return TriangleMesh(verts, faces)


def _significant_lines(path):
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield ln, line


def read_off(path):
    lines = _significant_lines(path)
    try:
        _, header = next(lines)
    except StopIteration:
        raise MeshError(f"{path}: empty OFF file") from None
    if header != "OFF":
        raise MeshError(f"{path}: missing OFF header")
    _, counts = next(lines)
    nv, nf = int(counts.split()[0]), int(counts.split()[1])
    verts = np.empty((nv, 3))
    for i in range(nv):
        ln, line = next(lines)
        parts = line.split()
        if len(parts) < 3:
            raise MeshError(f"{path}:{ln}: bad vertex line")
        verts[i] = [float(v) for v in parts[:3]]
    faces = np.empty((nf, 3), dtype=np.int64)
    for i in range(nf):
        ln, line = next(lines)
        parts = line.split()
        if int(parts[0]) != 3:
            raise MeshError(f"{path}:{ln}: face with {parts[0]} corners; triangles only")
        faces[i] = [int(v) for v in parts[1:4]]
    return verts, faces


def read_obj(path):
    verts, faces = [], []
    for ln, line in _significant_lines(path):
        parts = line.split()
        if parts[0] == "v":
            verts.append([float(v) for v in parts[1:4]])
        elif parts[0] == "f":
            idx = [int(p.split("/")[0]) for p in parts[1:]]
            if len(idx) != 3:
                raise MeshError(f"{path}:{ln}: face with {len(idx)} corners; triangles only")
            faces.append([i - 1 if i > 0 else len(verts) + i for i in idx])
        # other directives (vn, vt, usemtl, ...) are ignored
    if not faces:
        raise MeshError(f"{path}: no faces found")
    return np.asarray(verts, float), np.asarray(faces, dtype=np.int64)


def write_obj(path, mesh_or_verts, faces=None):
    """Write vertices/faces (or a TriangleMesh) as ASCII OBJ."""
    if faces is None:
        verts, faces = mesh_or_verts.vertices, mesh_or_verts.faces
    else:
        verts = mesh_or_verts
    with open(path, "w") as fh:
        for v in np.asarray(verts, float):
            fh.write("v " + " ".join(f"{c:.17g}" for c in v) + "\n")
        for f in np.asarray(faces):
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")
