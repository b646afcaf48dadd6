"""Diagnose div/curl of U vs the FD half-width delta."""
import time
import numpy as np

from decflow.meshgen import flat_torus
from decflow.dec import Cochain0
from decflow.spectral import compute_spectral_basis
from decflow.para import ParaproductConfig, synthesize_sobolev, sobolev_slope
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

rng = np.random.default_rng(11)
omega0 = synthesize_sobolev(basis, 2.2, rng)
v0 = biot_savart(omega0)
speed = v0.max_speed()
h = 1.0 / 128

# pipeline noise floor: an exactly divergence-free field through the
# vertex-field -> trapezoid path
vv = v0.field.vertex_vectors()
beta0 = VertexField(mesh, vv).tangential().flat()
m = mesh.vertex_areas
dfloor = divergence(beta0).values
cfloor = curl(beta0).values
print(f"floor: div_l2 {np.sqrt(m @ dfloor**2):.3e}  curl_l2 {np.sqrt(m @ cfloor**2):.3e}")

n = int(np.ceil(0.2 / (0.4 * h / max(speed, 1e-9))))
dt = 0.2 / n
state = FlowState.initial(omega0)
snaps = {}
J = 9
want = {n - J, n - 4, n - 1, n, n + 1, n + 4, n + J}
for k in range(1, n + J + 1):
    state = advect_step(state, dt)
    if k in want:
        snaps[k] = state
print(f"evolved {n+J} steps, dt={dt:.2e} ({time.time()-t0:.0f}s)")

Wcache = {}
def W_at(k):
    if k not in Wcache:
        s = snaps[k]
        Wcache[k] = compute_W(embed_flow(s.forward, s.inverse), cfg)
    return Wcache[k]

for j in (1, 4, J):
    U = compute_U(W_at(n - j), W_at(n), W_at(n + j))
    beta = U.flat()
    dv = divergence(beta).values
    cv = curl(beta).values
    rep = check_div_smoothness(U, basis, fit_range=fit)
    print(f"delta={j*dt:.3f}: div_l2 {np.sqrt(m @ dv**2):.3e} curl_l2 {np.sqrt(m @ cv**2):.3e} "
          f"slopes {rep.div_slope:.2f}/{rep.curl_slope:.2f} gap {rep.gap:+.2f} "
          f"res {0 if rep.div_fit is None else rep.div_fit.residual:.2f}/"
          f"{0 if rep.curl_fit is None else rep.curl_fit.residual:.2f}")
print(f"total {time.time()-t0:.0f}s")
