"""Poisson solves, harmonic 1-forms, Hodge decomposition, and Biot-Savart.

The velocity reconstructed from a vorticity field is represented by its
integrals over *dual* edges.  Writing the stream function solve as
S psi = -M omega and setting the dual-edge values to W1 d0 psi makes the
discrete divergence vanish identically (it factors through d1 d0 = 0) and
the curl reproduce omega up to the linear-solver residual.  Harmonic
corrections on positive-genus surfaces are added in the same representation
via the rotated harmonic basis, which keeps both identities intact.
"""

from __future__ import annotations

from dataclasses import dataclass
from collections import deque

import numpy as np
import scipy.sparse.linalg as spla

from .dec import (Cochain0, Cochain1, TangentField, codifferential,
                  face_to_vertex, rotate_J, sharp, _corner_gradients)
from .mesh import TriangleMesh


class PoissonSolver:
    """Cached factorization of the cotangent stiffness, kernel pinned.

    Solves S psi = rhs for mean-zero psi; the right-hand side must sum to
    zero (the compatibility condition on a closed surface).  One step of
    iterative refinement keeps relative residuals near rounding.
    """

    def __init__(self, mesh):
        self.mesh = mesh
        S = mesh.stiffness
        self._S = S
        self._lu = spla.splu(S[1:, 1:].tocsc())
        self._scale = abs(S).sum() / mesh.n_vertices

    def solve(self, rhs, rtol=1e-10):
        rhs = np.asarray(rhs, dtype=np.float64)
        norm = np.linalg.norm(rhs)
        if norm == 0.0:
            return np.zeros(self.mesh.n_vertices)
        imbalance = abs(rhs.sum())
        if imbalance > 1e-8 * (np.abs(rhs).sum() + 1e-300):
            raise ValueError(
                f"incompatible Poisson right-hand side (sum {rhs.sum():.3e})")
        psi = np.zeros(self.mesh.n_vertices)
        psi[1:] = self._lu.solve(rhs[1:])
        for _ in range(2):
            r = rhs - self._S @ psi
            if np.linalg.norm(r) <= 0.1 * rtol * norm:
                break
            psi[1:] += self._lu.solve(r[1:])
        r = rhs - self._S @ psi
        rel = np.linalg.norm(r) / norm
        if rel > rtol * 1e3:
            raise RuntimeError(f"Poisson solve stalled at residual {rel:.3e}")
        m = self.mesh.vertex_areas
        psi -= (m @ psi) / self.mesh.total_area
        return psi


def poisson_solver(mesh):
    """Per-mesh cached PoissonSolver."""
    solver = getattr(mesh, "_poisson", None)
    if solver is None:
        solver = PoissonSolver(mesh)
        mesh._poisson = solver
    return solver


# -- harmonic 1-forms ---------------------------------------------------------


@dataclass
class HarmonicBasis:
    """Basis of the 2g-dimensional space of discrete harmonic 1-cochains.

    ``representatives`` has shape (E, 2g): columns h_j satisfy d1 h_j = 0
    exactly (they are built from closed integer cochains) and d0^T W1 h_j = 0
    to solver precision.  ``gram`` is their W1 Gram matrix.  ``rotated``
    holds W1 h_j, the dual-edge integrals of the 90-degree rotations star h_j,
    which span the same harmonic space and are the form the Biot-Savart
    velocity uses.
    """

    mesh: TriangleMesh
    representatives: np.ndarray  # (E, 2g)
    rotated: np.ndarray          # (E, 2g) = W1 @ representatives
    gram: np.ndarray             # (2g, 2g)

    @property
    def dim(self):
        return self.representatives.shape[1]

    def cochains(self):
        return [Cochain1(self.mesh, self.representatives[:, j])
                for j in range(self.dim)]

    def project_coefficients(self, oneform):
        """Expansion coefficients of the harmonic part of a 1-cochain.

        For a primal cochain this projects onto h_j in the W1 inner product;
        for a dual cochain onto the rotated basis, whose Gram matrix is the
        same and whose pairing reduces to a plain dot with h_j.
        """
        if self.dim == 0:
            return np.zeros(0)
        if oneform.dual:
            pair = self.representatives.T @ oneform.values
        else:
            pair = self.representatives.T @ (self.mesh.edge_stars * oneform.values)
        return np.linalg.solve(self.gram, pair)


def _spanning_tree_edges(mesh):
    """BFS spanning tree of the vertex graph; returns a boolean edge mask."""
    V, E = mesh.n_vertices, mesh.n_edges
    adj = [[] for _ in range(V)]
    for e, (u, v) in enumerate(mesh.edges):
        adj[u].append((e, v))
        adj[v].append((e, u))
    in_tree = np.zeros(E, dtype=bool)
    seen = np.zeros(V, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for e, w in adj[u]:
            if not seen[w]:
                seen[w] = True
                in_tree[e] = True
                queue.append(w)
    if not seen.all():
        raise ValueError("mesh vertex graph is disconnected")
    return in_tree


def _cotree(mesh, in_tree):
    """BFS tree of the dual (face) graph avoiding primal tree edges.

    Returns (in_cotree mask, parent_face, parent_edge) with parents of the
    root face set to -1.
    """
    F = mesh.n_faces
    ef = mesh.edge_faces
    adj = [[] for _ in range(F)]
    for e in np.flatnonzero(~in_tree):
        fl, fr = ef[e]
        adj[fl].append((e, fr))
        adj[fr].append((e, fl))
    in_cotree = np.zeros(mesh.n_edges, dtype=bool)
    parent_face = np.full(F, -1, dtype=np.int64)
    parent_edge = np.full(F, -1, dtype=np.int64)
    seen = np.zeros(F, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        f = queue.popleft()
        for e, g in adj[f]:
            if not seen[g]:
                seen[g] = True
                in_cotree[e] = True
                parent_face[g] = f
                parent_edge[g] = e
                queue.append(g)
    return in_cotree, parent_face, parent_edge


def _root_path_chain(mesh, face, parent_face, parent_edge, out):
    """Accumulate the dual chain of the cotree path face -> root into ``out``.

    Crossing an edge from its right face to its left face counts +1 (the
    direction of the dual edge, primal rotated by +90 degrees).
    """
    ef = mesh.edge_faces
    f = face
    while parent_face[f] >= 0:
        e = parent_edge[f]
        p = parent_face[f]
        out[e] += 1.0 if p == ef[e, 0] else -1.0
        f = p


def harmonic_basis(mesh, basis=None):
    """Tree-cotree harmonic basis, cached on the mesh.

    The optional spectral ``basis`` argument is accepted for interface
    compatibility with solvers that project onto a near-kernel; the
    tree-cotree construction is exact and does not use it.
    """
    cached = getattr(mesh, "_harmonic", None)
    if cached is not None:
        return cached

    in_tree = _spanning_tree_edges(mesh)
    in_cotree, parent_face, parent_edge = _cotree(mesh, in_tree)
    leftover = np.flatnonzero(~in_tree & ~in_cotree)
    if len(leftover) != 2 * mesh.genus:
        raise RuntimeError(
            f"tree-cotree found {len(leftover)} generators, "
            f"expected {2 * mesh.genus}")

    E = mesh.n_edges
    reps = np.zeros((E, len(leftover)))
    solver = poisson_solver(mesh)
    ef = mesh.edge_faces
    for j, e0 in enumerate(leftover):
        seed = np.zeros(E)
        seed[e0] = 1.0  # cross e0 from its right face to its left face
        fl, fr = ef[e0]
        # continue from the left face back to the right face through the cotree
        _root_path_chain(mesh, fl, parent_face, parent_edge, seed)
        tmp = np.zeros(E)
        _root_path_chain(mesh, fr, parent_face, parent_edge, tmp)
        seed -= tmp
        closure = np.abs(mesh.d1 @ seed).max()
        if closure != 0.0:
            raise RuntimeError("homology generator is not closed")
        # remove the exact part to get the harmonic representative
        a = solver.solve(mesh.d0.T @ (mesh.edge_stars * seed))
        reps[:, j] = seed - mesh.d0 @ a

    rotated = mesh.edge_stars[:, None] * reps
    gram = reps.T @ rotated
    basis = HarmonicBasis(mesh, reps, rotated, gram)
    mesh._harmonic = basis
    return basis


# -- differential operators on velocity representations -----------------------


def curl(oneform):
    """Vorticity of a 1-cochain (or velocity) as a primal 0-cochain.

    For dual-edge data this is the exact circulation around dual cells over
    the dual cell area; for primal data the face curls d1/area are averaged
    to vertices with dual-area weights.  A DivFreeVelocity is accepted
    directly and dispatches on its dual 1-cochain.
    """
    if isinstance(oneform, DivFreeVelocity):
        oneform = oneform.oneform
    mesh = oneform.mesh
    if oneform.dual:
        circ = -(mesh.d0.T @ oneform.values)
        return Cochain0(mesh, circ / mesh.vertex_areas)
    face_curl = (mesh.d1 @ oneform.values) / mesh.face_areas
    return Cochain0(mesh, face_to_vertex(mesh, face_curl))


def divergence(oneform):
    """Divergence -d* of a 1-cochain (vertex values for primal input,
    face values for dual input).  A DivFreeVelocity is accepted directly."""
    if isinstance(oneform, DivFreeVelocity):
        oneform = oneform.oneform
    out = codifferential(oneform)
    out.values *= -1.0
    return out


def hodge_decompose(oneform, rtol=1e-10):
    """Split a primal 1-cochain into (exact, coexact, harmonic) parts."""
    if oneform.dual or oneform.degree != 1:
        raise ValueError("hodge_decompose expects a primal 1-cochain")
    mesh = oneform.mesh
    w = mesh.edge_stars
    solver = poisson_solver(mesh)
    a = solver.solve(mesh.d0.T @ (w * oneform.values), rtol=rtol)
    exact = Cochain1(mesh, mesh.d0 @ a)
    basis = harmonic_basis(mesh)
    if basis.dim:
        coeff = basis.project_coefficients(oneform)
        harm = Cochain1(mesh, basis.representatives @ coeff)
    else:
        harm = Cochain1(mesh, np.zeros(mesh.n_edges))
    coexact = Cochain1(mesh, oneform.values - exact.values - harm.values)
    return exact, coexact, harm


# -- Biot-Savart --------------------------------------------------------------


@dataclass
class CohomologyClass:
    """Coefficients of a velocity's harmonic part in the rotated harmonic basis."""

    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=np.float64)

    @classmethod
    def zero(cls, mesh):
        return cls(np.zeros(2 * mesh.genus))


@dataclass
class DivFreeVelocity:
    """Velocity field recovered from vorticity.

    ``oneform`` holds dual-edge integrals (a dual 1-cochain) and is exactly
    divergence-free; ``field`` is the per-face tangent vector reconstruction
    used for transport; ``stream`` is the mean-zero stream function.
    """

    mesh: TriangleMesh
    oneform: Cochain1
    field: TangentField
    stream: Cochain0
    cohomology: CohomologyClass

    def curl(self):
        return curl(self.oneform)

    def divergence(self):
        return divergence(self.oneform)

    def energy(self):
        """Kinetic energy of the face-wise reconstruction."""
        v = self.field.values
        return 0.5 * float((self.mesh.face_areas * (v * v).sum(1)).sum())

    def max_speed(self):
        return float(np.sqrt((self.field.values ** 2).sum(1)).max())


def biot_savart(omega, cohomology=None, rtol=1e-10):
    """Divergence-free velocity with prescribed vorticity and harmonic part.

    ``omega`` must be a primal 0-cochain with zero integral.  On positive
    genus surfaces the harmonic component is set by ``cohomology`` (zero by
    default); the returned velocity satisfies curl = omega to solver
    precision and div = 0 to rounding.
    """
    if omega.dual or omega.degree != 0:
        raise ValueError("biot_savart expects a primal 0-cochain vorticity")
    mesh = omega.mesh
    m = mesh.vertex_areas
    total = float(m @ omega.values)
    scale = float(np.abs(m * omega.values).sum())
    if abs(total) > 1e-10 * (scale + 1e-300):
        raise ValueError(
            f"vorticity must have zero mean on a closed surface "
            f"(integral {total:.3e})")

    solver = poisson_solver(mesh)
    rhs = -(m * omega.values)
    rhs -= rhs.sum() / len(rhs)  # remove rounding-level imbalance
    psi = solver.solve(rhs, rtol=rtol)

    dpsi = mesh.d0 @ psi
    beta = mesh.edge_stars * dpsi

    grads = _corner_gradients(mesh)
    grad_psi = np.einsum("fki,fk->fi", grads, psi[mesh.faces])
    vel = np.stack([-grad_psi[:, 1], grad_psi[:, 0]], axis=1)

    if cohomology is None:
        cohomology = CohomologyClass.zero(mesh)
    coeff = cohomology.coefficients
    if len(coeff) != 2 * mesh.genus:
        raise ValueError(
            f"cohomology class has {len(coeff)} coefficients, "
            f"expected {2 * mesh.genus}")
    if mesh.genus > 0 and np.any(coeff != 0.0):
        basis = harmonic_basis(mesh)
        beta = beta + basis.rotated @ coeff
        for j in range(basis.dim):
            hj = Cochain1(mesh, basis.representatives[:, j])
            vel += coeff[j] * rotate_J(sharp(hj)).values

    return DivFreeVelocity(
        mesh=mesh,
        oneform=Cochain1(mesh, beta, dual=True),
        field=TangentField(mesh, vel),
        stream=Cochain0(mesh, psi),
        cohomology=cohomology,
    )
