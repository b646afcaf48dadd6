"""Microlocal diagnostics for discrete area-preserving flows.

This module probes the linearized structure of vorticity transport on a
triangle mesh.  It builds tangential Jacobians of a flow map and its
inverse by 1-ring least squares, forms the advected-embedding field W
(a matrix paraproduct of the inverse Jacobian against the forward vertex
images) and its time derivative U, and measures whether the divergence
part of U decays faster than its curl part — the discrete signature that
the advected embedding stays tame while the rotational part carries the
roughness.

On top of that it evaluates principal symbols: the stream-function solver
has the explicit symbol -(i/2pi) J xi / |xi|^2, and conjugating the solver
by a pullback turns the leading symbol into a ratio of the pushforward
metric to the flat one.  Positivity of that ratio over sampled cotangent
directions is summarised in an ellipticity certificate.  The same
conjugation pipeline yields an order-zero operator (``apply_B_tilde``)
whose band-to-band energy ratios can be checked for boundedness.

Finally, ``dexp_jacobian`` assembles a finite-difference Jacobian of the
velocity-to-flow exponential map in eigenfield coordinates and reports its
singular spectrum, numerical rank at configurable thresholds, and equal
kernel/cokernel estimates — consistency evidence for index-zero behaviour,
not a proof.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dec import Cochain0, Cochain1, face_to_vertex
from .flow import (FlowMap, FoldOverError, corner_chart_velocities, run_euler,
                   _image_triangles_plane, _signed_areas_plane)
from .hodge import biot_savart, curl, divergence, poisson_solver
from .mesh import TriangleMesh
from .para import sample_at, sobolev_slope, vector_paraproduct


# -- vertex vector fields ------------------------------------------------------


@dataclass
class VertexField:
    """Per-vertex ambient vector data, shape (V, m)."""

    mesh: TriangleMesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        shape = (self.mesh.n_vertices, self.mesh.ambient_dim)
        if self.values.shape != shape:
            raise ValueError(f"VertexField needs shape {shape}")

    def tangential(self):
        """Projection onto the vertex tangent planes."""
        F = self.mesh.vertex_frames                      # (V, 2, m)
        comps = np.einsum("vkm,vm->vk", F, self.values)
        return VertexField(self.mesh, np.einsum("vkm,vk->vm", F, comps))

    def flat(self):
        """Trapezoid line integrals along primal edges (a primal 1-cochain)."""
        mesh = self.mesh
        a, b = mesh.edges[:, 0], mesh.edges[:, 1]
        seg = mesh.vertices[b] - mesh.vertices[a]
        avg = 0.5 * (self.values[a] + self.values[b])
        return Cochain1(mesh, np.einsum("em,em->e", avg, seg))

    def norm_l2(self):
        m = self.mesh.vertex_areas
        return float(np.sqrt((m * (self.values ** 2).sum(1)).sum()))


def _remove_exact(beta):
    """Divergence-free (coexact + harmonic) part of a primal 1-cochain."""
    mesh = beta.mesh
    weighted = mesh.edge_stars * beta.values
    rhs = mesh.d0.T @ weighted
    if np.linalg.norm(rhs) <= 1e-12 * (np.linalg.norm(weighted) + 1e-300):
        return Cochain1(mesh, beta.values.copy())
    alpha = poisson_solver(mesh).solve(rhs)
    return Cochain1(mesh, beta.values - mesh.d0 @ alpha)


# -- embedded flow maps --------------------------------------------------------


def _ring_jacobians(mesh, images):
    """(V, m, m) least-squares tangential differentials of a vertex map.

    The 1-ring edge offsets of each vertex, expressed in its orthonormal
    tangent frame, are regressed against the corresponding image offsets.
    Right-composing the fitted (m, 2) slope with the frame gives an ambient
    matrix that annihilates the normal directions exactly.
    """
    V = mesh.n_vertices
    valence = np.bincount(mesh.edges.ravel(), minlength=V)
    if valence.min() < 3:
        raise ValueError("degenerate 1-ring: vertex valence below 3")
    frames = mesh.vertex_frames                           # (V, 2, m)
    a, b = mesh.edges[:, 0], mesh.edges[:, 1]
    dx = mesh.vertices[b] - mesh.vertices[a]              # (E, m)
    dy = np.asarray(images, float)[b] - np.asarray(images, float)[a]
    xi_a = np.einsum("ekm,em->ek", frames[a], dx)
    xi_b = np.einsum("ekm,em->ek", frames[b], -dx)

    m = mesh.ambient_dim
    mom = np.zeros((V, 2, 2))
    cross = np.zeros((V, m, 2))
    np.add.at(mom, a, xi_a[:, :, None] * xi_a[:, None, :])
    np.add.at(mom, b, xi_b[:, :, None] * xi_b[:, None, :])
    np.add.at(cross, a, dy[:, :, None] * xi_a[:, None, :])
    np.add.at(cross, b, -dy[:, :, None] * xi_b[:, None, :])
    try:
        slope = np.linalg.solve(mom, cross.transpose(0, 2, 1)).transpose(0, 2, 1)
    except np.linalg.LinAlgError as exc:
        raise ValueError("degenerate 1-ring: collinear neighbour offsets") from exc
    return np.einsum("vmk,vkn->vmn", slope, frames)


@dataclass
class EmbeddedFlow:
    """Vertex images and tangential Jacobians of a flow map pair.

    ``phi``/``psi`` are the ambient positions of the forward and inverse
    maps at the mesh vertices; ``dphi``/``dpsi`` the corresponding 1-ring
    least-squares tangential Jacobians (only on-surface values and
    tangential derivatives enter any downstream formula, so no off-surface
    extension is ever materialised).
    """

    mesh: TriangleMesh
    forward: FlowMap
    inverse: FlowMap
    phi: np.ndarray
    psi: np.ndarray
    dphi: np.ndarray
    dpsi: np.ndarray

    @property
    def t(self):
        return self.forward.t


def embed_flow(forward, inverse):
    """EmbeddedFlow from a forward flow map and its inverse."""
    mesh = forward.mesh
    if inverse.mesh is not mesh:
        raise ValueError("forward and inverse maps live on different meshes")
    phi = forward.ambient_images()
    psi = inverse.ambient_images()
    return EmbeddedFlow(mesh, forward, inverse, phi, psi,
                        _ring_jacobians(mesh, phi), _ring_jacobians(mesh, psi))


# -- the advected-embedding field W and its time derivative --------------------


@dataclass
class WQuantity:
    """Matrix paraproduct of the inverse-map Jacobian with the forward images."""

    mesh: TriangleMesh
    values: np.ndarray      # (V, m)
    t: float


def compute_W(embedded, cfg):
    vals = vector_paraproduct(embedded.dpsi, embedded.phi, cfg)
    return WQuantity(embedded.mesh, vals, embedded.t)


def compute_U(w_minus, w_center, w_plus):
    """Centered time derivative of W, projected onto the tangent planes.

    Takes three W samples at t - delta, t, t + delta; the center sample
    anchors the stencil and checks even spacing.
    """
    mesh = w_center.mesh
    d_plus = w_plus.t - w_center.t
    d_minus = w_center.t - w_minus.t
    if d_plus <= 0 or d_minus <= 0:
        raise ValueError("W samples must be ordered in time")
    if abs(d_plus - d_minus) > 1e-9 * max(d_plus, d_minus):
        raise ValueError("centered difference needs evenly spaced samples")
    delta = 0.5 * (w_plus.t - w_minus.t)
    if delta < 1e-8:
        raise ValueError(f"delta={delta:.3e} too small: cancellation dominates")
    dot = (w_plus.values - w_minus.values) / (2.0 * delta)
    return VertexField(mesh, dot).tangential()


@dataclass
class DivSmoothnessReport:
    """Regularity gap between the divergence and curl parts of a field."""

    div_slope: float
    curl_slope: float
    gap: float
    threshold: float
    passed: bool
    div_fit: object = None
    curl_fit: object = None


def check_div_smoothness(U, basis, fit_range=None, threshold=0.3,
                         mask_rel=1e-13):
    """Measure slope(div part) - slope(curl part) of a tangent field.

    Accepts a VertexField (flattened by edge trapezoids) or a 1-cochain,
    primal or dual.  A side that vanishes identically short-circuits to an
    infinite slope: exactly divergence-free input passes with gap +inf, a
    gradient field has zero curl and fails with gap -inf.

    The default fit window spans the mid bands (eigenvalue indices M/32 to
    M/2).  Fields assembled from flow-map snapshots carry map-sampling
    noise in their last resolved octave and a low-mode transient from the
    Leibniz cancellation in the time derivative; the mid bands are where
    the structural decay of both parts is actually resolved.
    """
    mesh = basis.mesh
    if fit_range is None:
        lam = basis.eigenvalues
        fit_range = (lam[max(1, len(lam) // 32)], lam[len(lam) // 2])
    if isinstance(U, VertexField):
        beta = U.flat()
    else:
        beta = U
    if beta.degree != 1:
        raise ValueError("need a 1-cochain or a VertexField")

    div_part = divergence(beta)
    if div_part.dual:     # dual input: divergence lands pointwise on faces
        div_vals = face_to_vertex(mesh, div_part.values)
    else:
        div_vals = div_part.values
    curl_vals = curl(beta).values

    m = mesh.vertex_areas
    div_l2 = float(np.sqrt(m @ (div_vals ** 2)))
    curl_l2 = float(np.sqrt(m @ (curl_vals ** 2)))
    if div_l2 == 0.0 and curl_l2 == 0.0:
        raise ValueError("field has neither divergence nor curl content")
    if div_l2 <= 1e-10 * curl_l2:
        curl_fit = sobolev_slope(Cochain0(mesh, curl_vals), basis,
                                 fit_range=fit_range, mask_rel=mask_rel)
        return DivSmoothnessReport(np.inf, curl_fit.slope, np.inf, threshold,
                                   True, None, curl_fit)
    if curl_l2 <= 1e-10 * div_l2:
        div_fit = sobolev_slope(Cochain0(mesh, div_vals), basis,
                                fit_range=fit_range, mask_rel=mask_rel)
        return DivSmoothnessReport(div_fit.slope, np.inf, -np.inf, threshold,
                                   False, div_fit, None)

    div_fit = sobolev_slope(Cochain0(mesh, div_vals), basis,
                            fit_range=fit_range, mask_rel=mask_rel)
    curl_fit = sobolev_slope(Cochain0(mesh, curl_vals), basis,
                             fit_range=fit_range, mask_rel=mask_rel)
    gap = div_fit.slope - curl_fit.slope
    return DivSmoothnessReport(div_fit.slope, curl_fit.slope, gap, threshold,
                               bool(gap >= threshold), div_fit, curl_fit)


# -- principal symbols ---------------------------------------------------------


def _rot90(xi):
    """Apply the almost complex structure J to (..., 2) covectors."""
    xi = np.asarray(xi)
    return np.stack([-xi[..., 1], xi[..., 0]], axis=-1)


def symbol_biot_savart(xi):
    """Principal symbol of the stream-function velocity solver.

    Maps a covector to -(i/2pi) J xi / |xi|^2; the output is orthogonal to
    xi and has magnitude 1/(2pi |xi|).
    """
    xi = np.asarray(xi, dtype=np.float64)
    n2 = (xi ** 2).sum(-1)
    if np.any(n2 == 0.0):
        raise ValueError("symbol undefined at xi = 0")
    return (-1j / (2.0 * np.pi)) * _rot90(xi) / n2[..., None]


def _inverse_transpose_2x2(d):
    a = d[..., 0, 0]
    b = d[..., 0, 1]
    c = d[..., 1, 0]
    e = d[..., 1, 1]
    det = a * e - b * c
    out = np.empty(d.shape)
    out[..., 0, 0] = e
    out[..., 0, 1] = -c
    out[..., 1, 0] = -b
    out[..., 1, 1] = a
    return out / det[..., None, None], det


def symbol_main(xi, dphi):
    """Leading symbol of the pullback-conjugated solver composed with curl.

    With B the inverse transpose of the tangent map, the value at (x, xi)
    is <B J xi, J B xi> / |B xi|^2 — the ratio of the pushforward metric to
    the flat one along B xi.  Strictly positive whenever the tangent map is
    invertible and orientation-preserving.
    """
    xi = np.asarray(xi, dtype=np.float64)
    dphi = np.asarray(dphi, dtype=np.float64)
    B, det = _inverse_transpose_2x2(dphi)
    if np.any(det <= 0.0):
        raise ValueError("tangent map must be invertible and orientation-preserving")
    Bxi = np.einsum("...ij,...j->...i", B, xi)
    BJxi = np.einsum("...ij,...j->...i", B, _rot90(xi))
    num = (BJxi * _rot90(Bxi)).sum(-1)
    den = (Bxi ** 2).sum(-1)
    return num / den


def symbol_main_pushforward(xi, dphi):
    """Same symbol through the pushforward-metric determinant identity.

    Evaluates det(B) |xi|^2 / |B xi|^2, which agrees with ``symbol_main``
    identically for 2x2 matrices; keeping both forms gives a double
    evaluation that cross-checks the implementation.
    """
    xi = np.asarray(xi, dtype=np.float64)
    dphi = np.asarray(dphi, dtype=np.float64)
    B, det = _inverse_transpose_2x2(dphi)
    if np.any(det <= 0.0):
        raise ValueError("tangent map must be invertible and orientation-preserving")
    Bxi = np.einsum("...ij,...j->...i", B, xi)
    return (xi ** 2).sum(-1) / (det * (Bxi ** 2).sum(-1))


@dataclass
class SymbolSample:
    """One symbol evaluation: face index, unit covector, value."""

    face: int
    xi: np.ndarray
    value: complex


def face_tangent_maps(phi):
    """(F, 2, 2) tangent maps of a flow map in per-face orthonormal frames.

    Columns are the images of the two chart edge vectors; the image frame
    is Gram-Schmidt over the image edges with its second leg flipped where
    the image triangle opposes the surface orientation, so folded faces
    show up as negative determinants.
    """
    mesh = phi.mesh
    if mesh.plane_corners is not None:
        pc = mesh.plane_corners
        src = np.stack([pc[:, 1] - pc[:, 0], pc[:, 2] - pc[:, 0]], axis=-1)
        tri = _image_triangles_plane(phi)
        img = np.stack([tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]], axis=-1)
        return np.linalg.solve(src.transpose(0, 2, 1),
                               img.transpose(0, 2, 1)).transpose(0, 2, 1)

    c = mesh.corners2d
    src = np.stack([c[:, 1] - c[:, 0], c[:, 2] - c[:, 0]], axis=-1)  # (F,2,2)

    pts = phi.ambient_images()[mesh.faces]
    q1 = pts[:, 1] - pts[:, 0]
    q2 = pts[:, 2] - pts[:, 0]
    n1 = np.linalg.norm(q1, axis=1)
    u1 = q1 / n1[:, None]
    q2p = q2 - (q2 * u1).sum(1)[:, None] * u1
    n2 = np.linalg.norm(q2p, axis=1)
    normals = np.cross(mesh.frames[:, 0], mesh.frames[:, 1])
    sign = np.sign((np.cross(q1, q2) * normals).sum(1))
    img = np.empty((mesh.n_faces, 2, 2))
    img[:, 0, 0] = n1
    img[:, 0, 1] = (q2 * u1).sum(1)
    img[:, 1, 0] = 0.0
    img[:, 1, 1] = sign * n2
    return np.linalg.solve(src.transpose(0, 2, 1),
                           img.transpose(0, 2, 1)).transpose(0, 2, 1)


def _singular_ratio_2x2(d):
    """sigma_min / sigma_max per matrix, closed form."""
    q = (d ** 2).sum((-2, -1))
    det = d[..., 0, 0] * d[..., 1, 1] - d[..., 0, 1] * d[..., 1, 0]
    r = np.sqrt(np.maximum(q * q - 4.0 * det * det, 0.0))
    return np.sqrt(np.maximum(q - r, 0.0) / (q + r))


@dataclass
class EllipticityCertificate:
    """Sampled positivity certificate for the conjugated-solver symbol."""

    n_samples: int
    seed: int
    min_value: float
    argmin_face: int
    exact_min: float        # min over faces of sigma_min/sigma_max of dphi
    histogram_counts: np.ndarray
    histogram_edges: np.ndarray
    passed: bool

    @property
    def margin(self):
        return self.min_value


def ellipticity_certificate(phi, n_samples=10000, seed=0, bins=32):
    """Sample the conjugated symbol over random (face, direction) pairs.

    Fails fast with FoldOverError if any face of the image triangulation is
    inverted; otherwise PASS iff the sampled minimum is strictly positive.
    The exact fiberwise minimum over each face (the squared-singular-value
    ratio of the inverse transpose collapses to sigma_min/sigma_max of the
    tangent map itself) is reported alongside as the target the sampling
    converges to.
    """
    dphi = face_tangent_maps(phi)
    det = dphi[:, 0, 0] * dphi[:, 1, 1] - dphi[:, 0, 1] * dphi[:, 1, 0]
    bad = np.flatnonzero(det <= 0.0)
    if len(bad):
        raise FoldOverError(bad)

    rng = np.random.default_rng(seed)
    faces = rng.integers(0, phi.mesh.n_faces, size=n_samples)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n_samples)
    xi = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    values = symbol_main(xi, dphi[faces])

    k = int(np.argmin(values))
    counts, edges = np.histogram(values, bins=bins)
    exact_min = float(_singular_ratio_2x2(dphi).min())
    return EllipticityCertificate(
        n_samples=n_samples, seed=seed,
        min_value=float(values[k]), argmin_face=int(faces[k]),
        exact_min=exact_min, histogram_counts=counts, histogram_edges=edges,
        passed=bool(values[k] > 0.0))


# -- the conjugated curl operator ----------------------------------------------


def apply_B_tilde(omega, background, cfg):
    """Conjugate the vorticity-to-velocity solve by a background flow.

    Pulls the vorticity back along the inverse map, solves for the
    velocity, moves its embedding components along the forward map, applies
    the inverse-Jacobian matrix paraproduct, projects tangentially, and
    takes the curl of the resulting 1-form.  The two transport steps are
    plain compositions (sampling at the mapped points): the conjugation
    must collapse at the identity background, where the whole operator
    reduces to the projector paraproduct sandwiched between curl and its
    inverse — a zero-order perturbation of the identity on mean-zero
    vorticities.  Along a moving background it stays order zero, which the
    band-ratio diagnostics check.
    """
    mesh = omega.mesh
    if background.mesh is not mesh:
        raise ValueError("background flow lives on a different mesh")
    m = mesh.vertex_areas

    inv = background.inverse
    moved_in = sample_at(mesh, omega.values, inv.faces, inv.barys)
    moved_in -= (m @ moved_in) / mesh.total_area
    velocity = biot_savart(Cochain0(mesh, moved_in))

    vamb = velocity.field.vertex_vectors()               # (V, m)
    fwd = background.forward
    moved = sample_at(mesh, vamb, fwd.faces, fwd.barys)
    projected = vector_paraproduct(background.dpsi, moved, cfg)
    beta = VertexField(mesh, projected).tangential().flat()
    face_curl = (mesh.d1 @ beta.values) / mesh.face_areas
    return Cochain0(mesh, face_to_vertex(mesh, face_curl))


# -- finite-difference Jacobian of the exponential map --------------------------


def _detect_fold(phi):
    mesh = phi.mesh
    if mesh.plane_corners is not None:
        areas = _signed_areas_plane(_image_triangles_plane(phi))
        bad = np.flatnonzero(areas <= 0.0)
    else:
        pts = phi.ambient_images()[mesh.faces]
        normals = np.cross(mesh.frames[:, 0], mesh.frames[:, 1])
        img_n = np.cross(pts[:, 1] - pts[:, 0], pts[:, 2] - pts[:, 0])
        bad = np.flatnonzero((img_n * normals).sum(1) <= 0.0)
    if len(bad):
        raise FoldOverError(bad)


def _plane_rotations(mesh):
    """(F, 2, 2) rotations taking per-face chart coordinates to plane coordinates."""
    cached = getattr(mesh, "_chart_to_plane", None)
    if cached is None:
        c = mesh.corners2d
        p = mesh.plane_corners
        S = np.stack([c[:, 1] - c[:, 0], c[:, 2] - c[:, 0]], axis=-1)
        Q = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=-1)
        cached = np.linalg.solve(S.transpose(0, 2, 1),
                                 Q.transpose(0, 2, 1)).transpose(0, 2, 1)
        mesh._chart_to_plane = cached
    return cached


def _plane_edge_vectors(mesh):
    """(E, 2) minimal-image plane vectors along primal edges."""
    cached = getattr(mesh, "_plane_edge_vecs", None)
    if cached is None:
        pc = mesh.plane_coords
        d = pc[mesh.edges[:, 1]] - pc[mesh.edges[:, 0]]
        d -= np.round(d)
        mesh._plane_edge_vecs = cached = d
    return cached


def _plane_trapezoid(mesh, disp):
    """Trapezoid edge integrals of a per-vertex plane displacement field."""
    a, b = mesh.edges[:, 0], mesh.edges[:, 1]
    avg = 0.5 * (disp[a] + disp[b])
    return Cochain1(mesh, (avg * _plane_edge_vectors(mesh)).sum(1))


def _plane_vertex_velocity(velocity):
    """(V, 2) plane components of the transport velocity at the vertices.

    Reads the same per-corner chart velocity the point tracer integrates
    (each vertex through its reference face) and rotates it into plane
    coordinates, so a traced displacement divided by its duration matches
    this field to first order with no curvature residue.
    """
    mesh = velocity.mesh
    ident = FlowMap.identity(mesh)
    corner = np.argmax(ident.barys, axis=1)
    cv = corner_chart_velocities(velocity)[ident.faces, corner]   # (V, 2)
    return np.einsum("vij,vj->vi", _plane_rotations(mesh)[ident.faces], cv)


def _mode_cochains(basis, n_modes):
    """Div-free primal 1-cochains of the first curl eigenfields.

    Mode 0 is the constant and carries no velocity, so columns start at 1.
    Each eigenfield is read off exactly like a displacement column — on a
    plane chart intrinsically, otherwise through vertex vectors projected
    into the tangent plane of the vertex's reference face — then trapezoid-
    flattened with the exact part removed.  Sharing the read-off pipeline
    cancels its discretisation bias in the Jacobian entries; coordinating
    against clean fields instead leaves a few-percent systematic offset.
    """
    cached = getattr(basis, "_mode_cochains", None)
    if cached is not None and cached.shape[1] >= n_modes:
        return cached[:, :n_modes]
    mesh = basis.mesh
    plane = mesh.plane_corners is not None
    if not plane:
        frames = mesh.frames[FlowMap.identity(mesh).faces]    # (V, 2, m)
    cols = np.empty((mesh.n_edges, n_modes))
    for k in range(n_modes):
        w = biot_savart(Cochain0(mesh, basis.modes[:, k + 1]))
        if plane:
            beta = _plane_trapezoid(mesh, _plane_vertex_velocity(w))
        else:
            vv = w.field.vertex_vectors()
            comps = np.einsum("vkm,vm->vk", frames, vv)
            tang = np.einsum("vkm,vk->vm", frames, comps)
            beta = VertexField(mesh, tang).flat()
        cols[:, k] = _remove_exact(beta).values
    basis._mode_cochains = cols
    return cols


@dataclass
class JacobianSpectrum:
    """Singular spectrum of a finite-difference exponential-map Jacobian."""

    n_modes: int
    epsilon: float
    matrix: np.ndarray
    singular_values: np.ndarray       # descending
    ranks: dict                       # threshold -> numerical rank
    kernel_dims: dict
    cokernel_dims: dict
    min_singular: float
    conjugate_candidate: bool

    def rank(self, tau):
        s = self.singular_values
        return int((s > tau * s[0]).sum())


def dexp_jacobian(v, basis, n_modes, epsilon=1e-3, tau_rank=(1e-2, 1e-3),
                  n_steps=None, workers=1, conjugate_dip=0.05):
    """Finite-difference Jacobian of the exponential map at velocity v.

    Column k is the centered difference

        (Exp(v + eps w_k) - Exp(v - eps w_k)) / (2 eps)

    read off as per-vertex displacement between the time-1 flow maps,
    projected tangentially at the base image, made divergence-free, and
    expressed in mass-inner-product coordinates against the eigenfield
    cochains {w_j}.  All flows share one step size so the transport error
    cancels in the difference, and centering removes the curvature term
    of the map itself -- a one-sided difference picks up an O(eps) bias
    proportional to the second derivative of Exp, which is negligible
    near the origin but dominates along strong rays.

    Columns are independent simulations; ``workers`` > 1 runs them in a
    thread pool with deterministic index-ordered assembly.
    """
    if not 1e-4 <= epsilon <= 1e-2:
        raise ValueError(f"epsilon {epsilon:.1e} outside the stable bracket "
                         "[1e-4, 1e-2]")
    if n_modes + 1 > basis.size:
        raise ValueError(f"need {n_modes + 1} eigenpairs, basis has {basis.size}")
    mesh = basis.mesh
    omega_base = v.curl()

    if n_steps is None:
        h = mesh.edge_lengths.mean()
        n_steps = max(8, int(math.ceil(2.5 * v.max_speed() / h)))
    dt = 1.0 / n_steps

    if v.max_speed() == 0.0:
        base_phi = FlowMap.identity(mesh)
    else:
        base_phi = run_euler(omega_base, v.cohomology, 1.0, dt).final.forward
        _detect_fold(base_phi)
    plane = mesh.plane_corners is not None
    if not plane:
        frames = mesh.frames[base_phi.faces]             # (V, 2, m)

    B = _mode_cochains(basis, n_modes)
    w1 = mesh.edge_stars
    gram = B.T @ (w1[:, None] * B)

    def column(k):
        dw = epsilon * basis.modes[:, k + 1]
        phi_p = run_euler(Cochain0(mesh, omega_base.values + dw),
                          v.cohomology, 1.0, dt).final.forward
        _detect_fold(phi_p)
        phi_m = run_euler(Cochain0(mesh, omega_base.values - dw),
                          v.cohomology, 1.0, dt).final.forward
        _detect_fold(phi_m)
        if plane:
            disp = phi_p.plane_images() - phi_m.plane_images()
            disp -= np.round(disp)
            beta = _plane_trapezoid(mesh, disp / (2.0 * epsilon))
        else:
            disp = (phi_p.ambient_images() - phi_m.ambient_images())
            comps = np.einsum("vkm,vm->vk", frames, disp / (2.0 * epsilon))
            tang = np.einsum("vkm,vk->vm", frames, comps)
            beta = VertexField(mesh, tang).flat()
        beta = _remove_exact(beta)
        return B.T @ (w1 * beta.values)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(column, range(n_modes)))
    else:
        raw = [column(k) for k in range(n_modes)]
    C = np.linalg.solve(gram, np.column_stack(raw))

    s = np.linalg.svd(C, compute_uv=False)
    ranks = {tau: int((s > tau * s[0]).sum()) for tau in tau_rank}
    kernel = {tau: n_modes - r for tau, r in ranks.items()}
    return JacobianSpectrum(
        n_modes=n_modes, epsilon=epsilon, matrix=C, singular_values=s,
        ranks=ranks, kernel_dims=kernel, cokernel_dims=dict(kernel),
        min_singular=float(s[-1]),
        conjugate_candidate=bool(s[-1] < conjugate_dip))
