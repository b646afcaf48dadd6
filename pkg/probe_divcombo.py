"""Sweep A-slot / V-slot combinations of the W-dot main term."""
import time
import numpy as np

from decflow.meshgen import flat_torus
from decflow.dec import Cochain0
from decflow.spectral import compute_spectral_basis
from decflow.para import ParaproductConfig, synthesize_sobolev, vector_paraproduct
from decflow.hodge import biot_savart, curl, divergence
from decflow.flow import FlowState, advect_step
from decflow.probe import VertexField, embed_flow, check_div_smoothness

t0 = time.time()
mesh = flat_torus(128)
basis = compute_spectral_basis(mesh, 400)
cfg = ParaproductConfig(basis)
lam = basis.eigenvalues
fit = (lam[25], lam[350])
m = mesh.vertex_areas

rng = np.random.default_rng(11)
omega0 = synthesize_sobolev(basis, 2.2, rng)
v0 = biot_savart(omega0)
speed = v0.max_speed()
h = 1.0 / 128
n = int(np.ceil(0.2 / (0.4 * h / max(speed, 1e-9))))
dt = 0.2 / n
state = FlowState.initial(omega0)
for k in range(n):
    state = advect_step(state, dt)

e = embed_flow(state.forward, state.inverse)
vv = state.velocity.field.vertex_vectors()
phi = state.forward
VoPhi = np.einsum("vkm,vk->vm", vv[mesh.faces[phi.faces]], phi.barys)
pinv_dphi = np.linalg.pinv(e.dphi)

def report(tag, A, V):
    U = VertexField(mesh, vector_paraproduct(A, V, cfg)).tangential()
    rep = check_div_smoothness(U, basis, fit_range=fit)
    beta = U.flat()
    dv, cv = divergence(beta).values, curl(beta).values
    print(f"{tag}: div_l2 {np.sqrt(m@dv**2):.3e} curl_l2 {np.sqrt(m@cv**2):.3e} "
          f"slopes {rep.div_slope:.2f}/{rep.curl_slope:.2f} gap {rep.gap:+.2f}")

report("A=DPsi     V=VoPhi", e.dpsi, VoPhi)
report("A=DPsi     V=v    ", e.dpsi, vv)
report("A=pinvDPhi V=VoPhi", pinv_dphi, VoPhi)
report("A=pinvDPhi V=v    ", pinv_dphi, vv)
P = np.einsum("vim,vjm->vij", *( [np.transpose(
    np.stack([np.eye(mesh.vertices.shape[1])]*mesh.n_vertices), (0,1,2))]*0 or
    [mesh.vertex_frames, mesh.vertex_frames]))
report("A=proj     V=VoPhi", P, VoPhi)
report("A=proj     V=v    ", P, vv)
print(f"|DPsi - pinvDPhi| max {np.abs(e.dpsi - pinv_dphi).max():.3e}")
print(f"|DPsi - P| max {np.abs(e.dpsi - P).max():.3e}")
print(f"total {time.time()-t0:.0f}s")
