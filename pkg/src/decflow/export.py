"""Deterministic report writers: CSV tables, VTK snapshots, text certificates.

Everything here is byte-reproducible: floats are always rendered with
``%.17g`` (round-trip exact), column and row order is fixed by the caller,
and no timestamps or environment-dependent strings are emitted.
"""

from __future__ import annotations

import os

import numpy as np


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, header, rows):
    """Write a CSV file with %.17g floats and a fixed column order."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_diagnostics_csv(path, diagnostics):
    """One row per time step from a list of flow Diagnostics records."""
    header = ["t", "energy", "enstrophy", "casimir3", "casimir4",
              "omega_min", "omega_max", "div_residual", "area_error"]
    rows = [[getattr(d, name) for name in header] for d in diagnostics]
    write_csv(path, header, rows)


def write_spectrum_csv(path, singular_values):
    write_csv(path, ["index", "singular_value"],
              [(k, s) for k, s in enumerate(singular_values)])


def write_histogram_csv(path, edges, counts):
    """Symbol-sample histogram: one row per bin."""
    rows = [(lo, hi, int(c)) for lo, hi, c in zip(edges[:-1], edges[1:], counts)]
    write_csv(path, ["bin_low", "bin_high", "count"], rows)


def _vtk_points(mesh):
    """(V, 3) coordinates for export: plane meshes flatten to z=0."""
    if mesh.plane_coords is not None:
        pts = np.zeros((mesh.n_vertices, 3))
        pts[:, :2] = mesh.plane_coords
        return pts
    if mesh.ambient_dim == 3:
        return mesh.vertices
    raise ValueError("mesh has no 3D or planar coordinates to export")


def _vtk_cell_vectors(mesh, tangent):
    """(F, 3) per-face velocity vectors in exportable coordinates."""
    from .probe import _plane_rotations

    vecs = np.zeros((mesh.n_faces, 3))
    if mesh.plane_coords is not None:
        vecs[:, :2] = np.einsum("fij,fj->fi", _plane_rotations(mesh),
                                tangent.values)
    else:
        vecs[:, :] = tangent.to_ambient()
    return vecs


def write_vtk(path, state):
    """Legacy ASCII VTK snapshot: vorticity on points, velocity on cells."""
    mesh = state.omega.mesh
    pts = _vtk_points(mesh)
    vel = _vtk_cell_vectors(mesh, state.velocity.field)
    f = mesh.n_faces
    out = [
        "# vtk DataFile Version 3.0",
        "vorticity transport snapshot t=%.17g" % state.t,
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        "POINTS %d double" % mesh.n_vertices,
    ]
    out.extend("%.17g %.17g %.17g" % tuple(p) for p in pts)
    out.append("CELLS %d %d" % (f, 4 * f))
    out.extend("3 %d %d %d" % tuple(face) for face in mesh.faces)
    out.append("CELL_TYPES %d" % f)
    out.extend(["5"] * f)
    out.append("POINT_DATA %d" % mesh.n_vertices)
    out.append("SCALARS vorticity double 1")
    out.append("LOOKUP_TABLE default")
    out.extend("%.17g" % w for w in state.omega.values)
    out.append("CELL_DATA %d" % f)
    out.append("VECTORS velocity double")
    out.extend("%.17g %.17g %.17g" % tuple(v) for v in vel)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")


class Certificate:
    """One-page plain-text report: named checks, PASS/FAIL, fixed layout."""

    def __init__(self, title, preamble=()):
        self.title = title
        self.preamble = list(preamble)
        self.checks = []

    def check(self, name, passed, detail=""):
        self.checks.append((name, bool(passed), detail))
        return bool(passed)

    def info(self, name, detail):
        """A reported quantity that is not itself a pass/fail gate."""
        self.checks.append((name, None, detail))

    @property
    def passed(self):
        return all(ok for _, ok, _ in self.checks if ok is not None)

    def render(self):
        rule = "-" * 72
        lines = [self.title, rule]
        lines.extend(self.preamble)
        if self.preamble:
            lines.append(rule)
        for name, ok, detail in self.checks:
            tag = "    " if ok is None else ("PASS" if ok else "FAIL")
            row = "%s  %-38s %s" % (tag, name, detail)
            lines.append(row.rstrip())
        lines.append(rule)
        gated = [ok for _, ok, _ in self.checks if ok is not None]
        lines.append("RESULT: %s (%d/%d checks)"
                     % ("PASS" if self.passed else "FAIL",
                        sum(gated), len(gated)))
        return "\n".join(lines) + "\n"

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.render())
        return self.passed


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
