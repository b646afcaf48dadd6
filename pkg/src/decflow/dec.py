"""Cochains, exterior derivative, Hodge stars, and Whitney sharp/flat.

Conventions
-----------
Edges are stored once with a fixed orientation (low index -> high index);
1-cochain values are integrals along that orientation, so flipping an edge
flips the sign of its value.  Dual edges are the primal edges rotated by +90
degrees in the surface orientation; dual cells around vertices inherit the
counterclockwise orientation.

``dual=True`` cochains hold integrals over dual cells: a dual 0-cochain has
one value per face (dual vertices), a dual 1-cochain one value per edge, a
dual 2-cochain one value per vertex.  The Hodge star maps primal k to dual
(2-k) by the circumcentric measure ratios and satisfies star(star(c)) =
(-1)^(k(2-k)) c exactly, by construction.

With these choices the codifferential -star d star on primal 1-cochains
equals the mass adjoint  d* = M0^-1 d0^T W1,  so the 0-form Laplacian d* d
is the familiar positive-semidefinite cotangent Laplacian with lumped mass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import TriangleMesh


@dataclass
class Cochain:
    mesh: TriangleMesh
    values: np.ndarray
    dual: bool = False
    degree: int = field(init=False, default=-1)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        expected = self._expected_len()
        if self.values.shape != (expected,):
            kind = "dual" if self.dual else "primal"
            raise ValueError(
                f"{kind} {type(self).__name__} needs {expected} values, "
                f"got shape {self.values.shape}"
            )

    def _expected_len(self):
        # primal k-simplices, or dual cells of complementary dimension
        counts = (self.mesh.n_vertices, self.mesh.n_edges, self.mesh.n_faces)
        k = self.degree if not self.dual else 2 - self.degree
        return counts[k]

    def copy(self):
        return type(self)(self.mesh, self.values.copy(), self.dual)

    def __add__(self, other):
        self._check_compatible(other)
        return type(self)(self.mesh, self.values + other.values, self.dual)

    def __sub__(self, other):
        self._check_compatible(other)
        return type(self)(self.mesh, self.values - other.values, self.dual)

    def __mul__(self, scalar):
        return type(self)(self.mesh, self.values * float(scalar), self.dual)

    __rmul__ = __mul__

    def _check_compatible(self, other):
        if type(other) is not type(self) or other.dual != self.dual:
            raise TypeError("cochain degree/duality mismatch")
        if other.mesh is not self.mesh:
            raise ValueError("cochains live on different meshes")


class Cochain0(Cochain):
    def __post_init__(self):
        self.degree = 0
        super().__post_init__()


class Cochain1(Cochain):
    def __post_init__(self):
        self.degree = 1
        super().__post_init__()


class Cochain2(Cochain):
    def __post_init__(self):
        self.degree = 2
        super().__post_init__()


_BY_DEGREE = {0: Cochain0, 1: Cochain1, 2: Cochain2}


def exterior_derivative(c, k=None):
    """d on primal cochains; the dual-complex derivative on dual cochains.

    The dual derivative signs are fixed so that -star d star is the L2
    adjoint of d (see module docstring); concretely d(dual 0) = d1^T and
    d(dual 1) = -d0^T.
    """
    if k is not None and k != c.degree:
        raise ValueError(f"cochain has degree {c.degree}, not {k}")
    mesh = c.mesh
    if not c.dual:
        if c.degree == 0:
            return Cochain1(mesh, mesh.d0 @ c.values)
        if c.degree == 1:
            return Cochain2(mesh, mesh.d1 @ c.values)
        raise ValueError("d on a top-degree (2-)cochain is not defined")
    if c.degree == 0:
        return Cochain1(mesh, mesh.d1.T @ c.values, dual=True)
    if c.degree == 1:
        return Cochain2(mesh, -(mesh.d0.T @ c.values), dual=True)
    raise ValueError("d on a top-degree dual cochain is not defined")


def hodge_star(c, k=None):
    """Diagonal circumcentric Hodge star; applying it twice gives (-1)^(k(2-k))."""
    if k is not None and k != c.degree:
        raise ValueError(f"cochain has degree {c.degree}, not {k}")
    mesh = c.mesh
    if not c.dual:
        if c.degree == 0:
            return Cochain2(mesh, c.values * mesh.vertex_areas, dual=True)
        if c.degree == 1:
            return Cochain1(mesh, c.values * mesh.edge_stars, dual=True)
        return Cochain0(mesh, c.values / mesh.face_areas, dual=True)
    if c.degree == 2:  # dual 2-cochain lives on vertices
        return Cochain0(mesh, c.values / mesh.vertex_areas)
    if c.degree == 1:
        return Cochain1(mesh, -c.values / mesh.edge_stars)
    return Cochain2(mesh, c.values * mesh.face_areas)


def codifferential(c, k=None):
    """-star d star.  On primal 1-cochains this is the mass adjoint of d.

    Returns a cochain one degree down, on the same (primal/dual) complex.
    """
    if k is not None and k != c.degree:
        raise ValueError(f"cochain has degree {c.degree}, not {k}")
    if c.degree == 0:
        raise ValueError("codifferential of a 0-cochain is zero; not represented")
    starred = hodge_star(c)
    dstarred = exterior_derivative(starred)
    out = hodge_star(dstarred)
    out.values *= -1.0
    return out


def laplace_beltrami(f):
    """Positive 0-form Laplacian d* d (cotangent weights, lumped mass)."""
    if f.degree != 0 or f.dual:
        raise ValueError("laplace_beltrami expects a primal 0-cochain")
    return Cochain0(f.mesh, (f.mesh.stiffness @ f.values) / f.mesh.vertex_areas)


def hodge_laplacian_1(a):
    """1-form Hodge Laplacian d d* + d* d on primal 1-cochains."""
    if a.degree != 1 or a.dual:
        raise ValueError("hodge_laplacian_1 expects a primal 1-cochain")
    term1 = exterior_derivative(codifferential(a))
    term2 = codifferential(exterior_derivative(a))
    return term1 + term2


# -- tangent fields and Whitney interpolation --------------------------------


@dataclass
class TangentField:
    """Piecewise-constant tangent vector field: one 2D vector per face chart."""

    mesh: TriangleMesh
    values: np.ndarray  # (F, 2) in the per-face orthonormal chart

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.mesh.n_faces, 2):
            raise ValueError("TangentField needs shape (F, 2)")

    def to_ambient(self):
        """(F, m) vectors in embedding coordinates."""
        return np.einsum("fi,fim->fm", self.values, self.mesh.frames)

    @classmethod
    def from_ambient(cls, mesh, vecs):
        """Project ambient per-face vectors onto the face charts."""
        comps = np.einsum("fm,fim->fi", np.asarray(vecs, float), mesh.frames)
        return cls(mesh, comps)

    def vertex_vectors(self):
        """Ambient vectors at vertices: dual-area-weighted average of incident faces."""
        mesh = self.mesh
        amb = self.to_ambient()
        out = np.zeros((mesh.n_vertices, mesh.ambient_dim))
        w = (mesh.face_areas / 3.0)[:, None] * amb
        for k in range(3):
            np.add.at(out, mesh.faces[:, k], w)
        return out / mesh.vertex_areas[:, None]

    def norm_l2(self):
        return float(np.sqrt((self.mesh.face_areas * (self.values ** 2).sum(1)).sum()))

    def __add__(self, other):
        return TangentField(self.mesh, self.values + other.values)

    def __sub__(self, other):
        return TangentField(self.mesh, self.values - other.values)

    def __mul__(self, scalar):
        return TangentField(self.mesh, self.values * float(scalar))

    __rmul__ = __mul__


def rotate_J(v):
    """Rotate a tangent field by +90 degrees (the almost complex structure)."""
    x, y = v.values[:, 0], v.values[:, 1]
    return TangentField(v.mesh, np.stack([-y, x], axis=1))


def _corner_gradients(mesh):
    """(F, 3, 2) chart gradients of the three barycentric hat functions."""
    if not hasattr(mesh, "_hat_grads"):
        c = mesh.corners2d
        opp = c[:, [2, 0, 1]] - c[:, [1, 2, 0]]  # edge opposite each corner
        grads = np.stack([-opp[..., 1], opp[..., 0]], axis=-1)
        mesh._hat_grads = grads / (2.0 * mesh.face_areas)[:, None, None]
    return mesh._hat_grads


def sharp(a):
    """Whitney interpolation of a primal 1-cochain, sampled at face barycenters."""
    if a.degree != 1 or a.dual:
        raise ValueError("sharp expects a primal 1-cochain")
    mesh = a.mesh
    grads = _corner_gradients(mesh)
    vals = a.values[mesh.face_edges] * mesh.face_edge_signs  # (F, 3), face-oriented
    # boundary segment k runs corner k -> corner k+1; Whitney form at the
    # barycenter is (grad lambda_{k+1} - grad lambda_k) / 3
    diff = grads[:, [1, 2, 0]] - grads
    return TangentField(mesh, np.einsum("fk,fki->fi", vals, diff) / 3.0)


def flat(v):
    """Integrate a tangent field along edges (average of the two face charts)."""
    mesh = v.mesh
    c = mesh.corners2d
    seg = c[:, [1, 2, 0]] - c  # chart vector of boundary segment k
    per_face = np.einsum("fi,fki->fk", v.values, seg) * mesh.face_edge_signs
    out = np.zeros(mesh.n_edges)
    np.add.at(out, mesh.face_edges.ravel(), per_face.ravel())
    return Cochain1(mesh, out / 2.0)


def face_to_vertex(mesh, face_values):
    """Transfer face samples to vertices with dual-area weights (integral-preserving)."""
    out = np.zeros(mesh.n_vertices)
    w = np.repeat(mesh.face_areas / 3.0 * np.asarray(face_values, float), 3)
    np.add.at(out, mesh.faces.ravel(), w)
    return out / mesh.vertex_areas


def vertex_to_face(mesh, vertex_values):
    """Sample vertex data at face barycenters (mean of the three corners)."""
    return np.asarray(vertex_values, float)[mesh.faces].mean(axis=1)


def integrate(c):
    """Total integral of a 0- or 2-cochain against its natural measure."""
    if c.degree == 0 and not c.dual:
        return float((c.values * c.mesh.vertex_areas).sum())
    if c.degree == 2 and not c.dual:
        return float(c.values.sum())
    if c.degree == 2 and c.dual:
        return float(c.values.sum())
    if c.degree == 0 and c.dual:
        return float((c.values * c.mesh.face_areas).sum())
    raise ValueError("integrate expects a 0- or 2-cochain")


def norm_l2(c):
    """Mass-weighted L2 norm of a cochain (0-form / 1-form / 2-form inner products)."""
    mesh = c.mesh
    v = c.values
    if c.degree == 0 and not c.dual:
        return float(np.sqrt((mesh.vertex_areas * v * v).sum()))
    if c.degree == 0 and c.dual:
        return float(np.sqrt((mesh.face_areas * v * v).sum()))
    if c.degree == 1 and not c.dual:
        return float(np.sqrt((mesh.edge_stars * v * v).sum()))
    if c.degree == 1 and c.dual:
        return float(np.sqrt((v * v / mesh.edge_stars).sum()))
    if c.degree == 2 and not c.dual:
        return float(np.sqrt((v * v / mesh.face_areas).sum()))
    return float(np.sqrt((v * v / mesh.vertex_areas).sum()))


def inner(a, b):
    """Mass-weighted L2 inner product of two cochains of equal degree/duality."""
    if a.degree != b.degree or a.dual != b.dual:
        raise ValueError("inner product needs matching degree and duality")
    mesh = a.mesh
    if a.degree == 0 and not a.dual:
        w = mesh.vertex_areas
    elif a.degree == 0:
        w = mesh.face_areas
    elif a.degree == 1 and not a.dual:
        w = mesh.edge_stars
    elif a.degree == 1:
        w = 1.0 / mesh.edge_stars
    elif not a.dual:
        w = 1.0 / mesh.face_areas
    else:
        w = 1.0 / mesh.vertex_areas
    return float((w * a.values * b.values).sum())
