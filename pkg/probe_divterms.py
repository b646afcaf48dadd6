"""Term-split of U: which part of dW/dt carries the rough divergence?"""
import time
import numpy as np

from decflow.meshgen import flat_torus
from decflow.dec import Cochain0
from decflow.spectral import compute_spectral_basis
from decflow.para import ParaproductConfig, synthesize_sobolev, vector_paraproduct
from decflow.hodge import biot_savart, curl, divergence
from decflow.flow import FlowState, advect_step
from decflow.probe import (VertexField, embed_flow, compute_W, compute_U,
                           check_div_smoothness)

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
snaps = {}
J = 9
want = {n - J, n, n + J}
for k in range(1, n + J + 1):
    state = advect_step(state, dt)
    if k in want:
        snaps[k] = state

emb = {k: embed_flow(s.forward, s.inverse) for k, s in snaps.items()}
U_fd = compute_U(*[compute_W(emb[k], cfg) for k in (n - J, n, n + J)])

def report(tag, U):
    rep = check_div_smoothness(U, basis, fit_range=fit)
    beta = U.flat() if isinstance(U, VertexField) else U
    dv, cv = divergence(beta).values, curl(beta).values
    print(f"{tag}: div_l2 {np.sqrt(m@dv**2):.3e} curl_l2 {np.sqrt(m@cv**2):.3e} "
          f"slopes {rep.div_slope:.2f}/{rep.curl_slope:.2f} gap {rep.gap:+.2f}")

report("U_fd (delta=0.1)", U_fd)

# J2 term: Pi_{DPsi}(V o Phi) at t = 0.2
s = snaps[n]
e = emb[n]
vv = s.velocity.field.vertex_vectors()
phi = s.forward
VoPhi = np.einsum("vkm,vk->vm", vv[mesh.faces[phi.faces]], phi.barys)
U2 = VertexField(mesh, vector_paraproduct(e.dpsi, VoPhi, cfg)).tangential()
report("U2 = Pi_dpsi(V o Phi)", U2)

# same with V at the base point (no composition)
U2b = VertexField(mesh, vector_paraproduct(e.dpsi, vv, cfg)).tangential()
report("U2b = Pi_dpsi(V)", U2b)

# remainder carried by the FD derivative beyond J2
Urem = VertexField(mesh, U_fd.values - U2.values).tangential()
report("U_fd - U2", Urem)

# and the raw tangential velocity for scale
Uv = VertexField(mesh, vv).tangential()
report("v itself", Uv)
print(f"total {time.time()-t0:.0f}s")
