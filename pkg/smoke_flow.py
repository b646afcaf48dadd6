import numpy as np

from decflow.meshgen import flat_torus, icosphere
from decflow.dec import Cochain0
from decflow.hodge import biot_savart, curl
from decflow.flow import (FlowMap, FlowState, advect_step, run_euler, exp_map,
                          invert_flow_map, compose_maps, pushforward_area_error,
                          trace_points, evaluate_map, _vertex_start)
from decflow.spectral import compute_spectral_basis
from decflow.para import (ParaproductConfig, paraproduct, window, sobolev_slope,
                          synthesize_sobolev, bony_remainder, paracomposition)

np.set_printoptions(precision=4)

print("== torus shear flow ==")
mesh = flat_torus(32)
y = mesh.plane_coords[:, 1]
x = mesh.plane_coords[:, 0]
omega = Cochain0(mesh, -2 * np.pi * np.cos(2 * np.pi * y))
v = biot_savart(omega)
print("max speed", v.max_speed())

# walker sanity: trace one full period along a row
f0, p0 = _vertex_start(mesh)
faces, pos = trace_points(mesh, f0[:5], p0[:5], v.field.values, 0.25)
print("traced ok", faces[:5])

state = FlowState.initial(omega)
e0 = state.velocity.energy()
for _ in range(20):
    state = advect_step(state, 1.0 / 64)
err = np.abs(state.omega.values - omega.values).max() / np.abs(omega.values).max()
print(f"shear steadiness after 20 steps: {err:.3e}")
print(f"energy drift: {abs(state.velocity.energy() - e0) / e0:.3e}")
print(f"area error: {pushforward_area_error(state.forward):.3e}")

print("== exp map ==")
ident = exp_map(biot_savart(Cochain0(mesh, np.zeros(mesh.n_vertices))))
print("Exp(0) identity:", ident.is_identity())

phi = exp_map(v, n_steps=64)
img = phi.plane_images()
target = np.stack([np.mod(x + np.sin(2 * np.pi * y), 1.0), y], 1)
d = img - target
d -= np.round(d)
print(f"Exp(shear) vertex error at 32^2: {np.linalg.norm(d, axis=1).max():.3e}")

inv = invert_flow_map(phi)
roundtrip = compose_maps(phi, inv)
rt = roundtrip.plane_images()
d2 = rt - mesh.plane_coords
d2 -= np.round(d2)
h = mesh.edge_lengths.mean()
print(f"phi o phi^-1 error: {np.linalg.norm(d2, axis=1).max():.3e} (2h = {2*h:.3e})")

comp = compose_maps(phi, FlowMap.identity(mesh))
print("compose with identity exact:",
      np.array_equal(comp.faces, phi.faces) and np.allclose(comp.barys, phi.barys))

print("== sphere rotation ==")
sph = icosphere(3)
z = sph.vertices[:, 2]
om_s = Cochain0(sph, 2 * z)
vs = biot_savart(om_s)
st = FlowState.initial(om_s)
e0 = st.velocity.energy()
for _ in range(16):
    st = advect_step(st, 1.0 / 32)
errs = np.abs(st.omega.values - om_s.values).max() / 2
print(f"rotation steadiness after 16 steps (ico3): {errs:.3e}")
alpha = 0.5
img = st.forward.ambient_images()
ca, sa = np.cos(alpha), np.sin(alpha)
R = np.array([[ca, -sa, 0], [sa, ca, 0], [0, 0, 1]])
target = sph.vertices @ R.T
print(f"rotation map error at t=0.5: {np.linalg.norm(img - target, axis=1).max():.3e}")
inv_s = invert_flow_map(st.forward)
rt = compose_maps(st.forward, inv_s).ambient_images()
print(f"sphere roundtrip: {np.linalg.norm(rt - sph.vertices, axis=1).max():.3e}")

print("== paraproducts ==")
basis = compute_spectral_basis(mesh, 120)
cfg = ParaproductConfig(basis)
# window normalization: int psi du/u = 1
u = np.geomspace(1e-4, 200, 4000)
val = np.trapezoid(window(u, "psi", cfg) / u, u)
print(f"int psi du/u = {val:.8f}")
print(f"phi_tilde(0) = {window(np.array([0.0]), 'phi_tilde', cfg)[0]:.8f}")

rng = np.random.default_rng(7)
f = synthesize_sobolev(basis, 2.5, rng)
one = np.ones(mesh.n_vertices)
pf = paraproduct(one, f, cfg)
fm = f.values - f.values.mean() * 0  # f already mean-free
delta = np.linalg.norm(pf.values - f.values) / np.linalg.norm(f.values)
print(f"paraproduct identity |Pi_1 f - f| = {delta:.3e}")

cfg2 = ParaproductConfig(basis, n_quad=128)
pf2 = paraproduct(one, f, cfg2)
print(f"doubling Q changes: {np.linalg.norm(pf2.values - pf.values) / np.linalg.norm(pf.values):.3e}")

fit = sobolev_slope(f, basis)
print(f"slope of synthetic H^2.5 field: {fit.slope:.3f} residual {fit.residual:.3f}")

g = synthesize_sobolev(basis, 2.5, rng)
rem = bony_remainder(f, g, cfg)
fit_r = sobolev_slope(rem, basis)
print(f"remainder slope: {fit_r.slope:.3f} (inputs 2.5)")

kf = paracomposition(f, phi, cfg)
fit_k = sobolev_slope(kf, basis)
pull = Cochain0(mesh, np.einsum("vk,vk->v", f.values[mesh.faces[phi.faces]], phi.barys))
fit_p = sobolev_slope(pull, basis)
print(f"paracomposition slope {fit_k.slope:.3f} vs raw pullback {fit_p.slope:.3f}")
