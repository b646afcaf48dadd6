import time

import numpy as np

from decflow.meshgen import flat_torus, icosphere
from decflow.dec import Cochain0
from decflow.hodge import biot_savart
from decflow.flow import FlowMap, exp_map, invert_flow_map, locate_points
from decflow.spectral import compute_spectral_basis
from decflow.para import ParaproductConfig, synthesize_sobolev
from decflow.probe import (VertexField, embed_flow, compute_W, compute_U,
                           check_div_smoothness, symbol_biot_savart,
                           symbol_main, symbol_main_pushforward,
                           face_tangent_maps, ellipticity_certificate,
                           apply_B_tilde, dexp_jacobian, _ring_jacobians)

print("== symbols ==")
xi = np.array([1.0, 0.0])
val = symbol_biot_savart(xi)
print("sigma(S) at e1:", val, "expect -(i/2pi) e2")
rng = np.random.default_rng(0)
th = rng.uniform(0, 2 * np.pi, 100)
xis = np.stack([np.cos(th), np.sin(th)], -1)
vals = symbol_biot_savart(xis)
print("orth max:", np.abs((xis * vals).sum(-1)).max(),
      "mag err:", np.abs(np.abs(np.linalg.norm(vals, axis=-1)) - 1 / (2 * np.pi)).max())

ident2 = np.eye(2)
print("sigma(main) at id:", symbol_main(xis, ident2) - 1.0)
c, s = np.cos(0.3), np.sin(0.3)
rot = np.array([[c, -s], [s, c]])
print("rot max dev:", np.abs(symbol_main(xis, rot) - 1.0).max())
d = np.diag([2.0, 0.5])
v1 = symbol_main(np.array([1.0, 0.0]), d)
v2 = symbol_main_pushforward(np.array([1.0, 0.0]), d)
print(f"diag(2,1/2) xi=e1: {v1:.15f} vs oracle {v2:.15f} (expect 4)")
print("double-eval max dev:",
      np.abs(symbol_main(xis, rot @ d) - symbol_main_pushforward(xis, rot @ d)).max())

print("== embed_flow, torus identity ==")
mesh = flat_torus(32)
ident = FlowMap.identity(mesh)
e = embed_flow(ident, ident)
F = mesh.vertex_frames
P = np.einsum("vkm,vkn->vmn", F, F)
print("|DPhi - P| max:", np.abs(e.dphi - P).max())
# normal annihilation: random normal vectors at vertices
nrm = rng.normal(size=(mesh.n_vertices, mesh.ambient_dim))
nrm -= np.einsum("vmn,vn->vm", P, nrm)
print("normal annihilation:", np.abs(np.einsum("vmn,vn->vm", e.dphi, nrm)).max())

print("== face tangent maps at identity ==")
D = face_tangent_maps(ident)
print("plane identity dev:", np.abs(D - np.eye(2)).max())

sph = icosphere(3)
idents = FlowMap.identity(sph)
Ds = face_tangent_maps(idents)
print("sphere identity dev:", np.abs(Ds - np.eye(2)).max())

print("== embed_flow, sphere rotation ==")
ang = 0.37
R = np.array([[np.cos(ang), -np.sin(ang), 0],
              [np.sin(ang), np.cos(ang), 0],
              [0, 0, 1.0]])
imgs = sph.vertices @ R.T
rf, rb = locate_points(sph, imgs)
rotmap = FlowMap(sph, rf, rb, t=1.0)
rotinv = invert_flow_map(rotmap)
er = embed_flow(rotmap, rotinv)
ei = embed_flow(idents, idents)
print("|DPhi_rot - R DPhi_id| max (PL-snapped):", np.abs(er.dphi - R @ ei.dphi).max())
dphi_exact = _ring_jacobians(sph, sph.vertices @ R.T)
print("|DPhi(exact imgs) - R DPhi_id| max:", np.abs(dphi_exact - R @ ei.dphi).max())
Ps = np.einsum("vkm,vkn->vmn", sph.vertex_frames, sph.vertex_frames)
print("|DPhi_rot - R P| max:", np.abs(er.dphi - R @ Ps).max())

# chain rule needs a small flow: DPsi is fit at the source vertex, not at
# the image, so the mismatch scales with the displacement
wsm = biot_savart(Cochain0(sph, 0.05 * (sph.vertices[:, 2]
                                        - (sph.vertex_areas @ sph.vertices[:, 2])
                                        / sph.total_area)))
phis = exp_map(wsm, n_steps=8)
esm = embed_flow(phis, invert_flow_map(phis))
print("|DPsi DPhi - P| max (small flow):", np.abs(esm.dpsi @ esm.dphi - Ps).max())
cert = ellipticity_certificate(rotmap, n_samples=2000, seed=1)
print(f"rotation cert: min={cert.min_value:.2e} exact={cert.exact_min:.2e} "
      f"passed={cert.passed}")

print("== ellipticity at identity ==")
cert = ellipticity_certificate(ident, n_samples=2000, seed=1)
print(f"identity cert: min={cert.min_value} exact={cert.exact_min} passed={cert.passed}")

print("== dexp at v = 0, torus32 M=12 ==")
t0 = time.time()
basis32 = compute_spectral_basis(mesh, 16)
v0 = biot_savart(Cochain0(mesh, np.zeros(mesh.n_vertices)))
spec = dexp_jacobian(v0, basis32, n_modes=12, epsilon=1e-3)
print("sv:", spec.singular_values)
print("|C - I| op:", np.linalg.norm(spec.matrix - np.eye(12), 2),
      f"({time.time()-t0:.1f}s)")
print("ranks:", spec.ranks, "kernel:", spec.kernel_dims)
