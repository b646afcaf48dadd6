"""Band-by-band div energy of the W-dot main term vs the pipeline floor."""
import time
import numpy as np

from decflow.meshgen import flat_torus
from decflow.dec import Cochain0
from decflow.spectral import compute_spectral_basis
from decflow.para import (ParaproductConfig, synthesize_sobolev,
                          vector_paraproduct, sobolev_slope)
from decflow.hodge import biot_savart, curl, divergence
from decflow.flow import FlowState, advect_step
from decflow.probe import VertexField, embed_flow, compute_W, compute_U, \
    check_div_smoothness

t0 = time.time()
mesh = flat_torus(128)
basis = compute_spectral_basis(mesh, 400)
cfg = ParaproductConfig(basis)
lam = basis.eigenvalues
m = mesh.vertex_areas

rng = np.random.default_rng(11)
omega0 = synthesize_sobolev(basis, 2.2, rng)
v0 = biot_savart(omega0)
speed = v0.max_speed()
h = 1.0 / 128
n = int(np.ceil(0.2 / (0.4 * h / max(speed, 1e-9))))
dt = 0.2 / n
state = FlowState.initial(omega0)
snaps = {}
J = 9
for k in range(1, n + J + 1):
    state = advect_step(state, dt)
    if k in (n - J, n, n + J):
        snaps[k] = state
state = snaps[n]

e = embed_flow(state.forward, state.inverse)
vv = state.velocity.field.vertex_vectors()
phi = state.forward
VoPhi = np.einsum("vkm,vk->vm", vv[mesh.faces[phi.faces]], phi.barys)
U2 = VertexField(mesh, vector_paraproduct(e.dpsi, VoPhi, cfg)).tangential()
U_fd = compute_U(*[compute_W(embed_flow(snaps[k].forward, snaps[k].inverse), cfg)
                   for k in (n - J, n, n + J)])

# floor: divergence-free velocity with U2-matched magnitude through same path
w2 = synthesize_sobolev(basis, 2.2, np.random.default_rng(99))
vfloor = biot_savart(w2).field.vertex_vectors()
scale = np.linalg.norm(U2.values) / np.linalg.norm(vfloor)
floor = VertexField(mesh, vfloor * scale).tangential()

edges = [1, 3, 6, 12, 25, 50, 100, 200, 400]
def bands(vals):
    c = basis.analyze(np.asarray(vals, float))
    return [float((c[a:b] ** 2).sum()) for a, b in zip(edges[:-1], edges[1:])]

for tag, U in (("U2 div   ", U2), ("U_fd div ", U_fd), ("floor div", floor)):
    dv = divergence(U.flat()).values
    print(tag, " ".join(f"{x:.1e}" for x in bands(dv)))
for tag, U in (("U2 curl  ", U2), ("U_fd curl", U_fd)):
    cv = curl(U.flat()).values
    print(tag, " ".join(f"{x:.1e}" for x in bands(cv)))

for lo, hi in ((25, 350), (25, 200), (12, 100), (6, 100), (12, 200)):
    rep = check_div_smoothness(U_fd, basis, fit_range=(lam[lo], lam[hi]))
    rep2 = check_div_smoothness(U2, basis, fit_range=(lam[lo], lam[hi]))
    print(f"window [{lo},{hi}]: U_fd {rep.div_slope:.2f}/{rep.curl_slope:.2f} "
          f"gap {rep.gap:+.2f} | U2 {rep2.div_slope:.2f}/{rep2.curl_slope:.2f} "
          f"gap {rep2.gap:+.2f}")
print(f"total {time.time()-t0:.0f}s")
