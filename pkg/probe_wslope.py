"""W-vs-Phi slope tracking: low-window shear and rough background."""
import time
import numpy as np

from decflow.meshgen import flat_torus
from decflow.dec import Cochain0
from decflow.spectral import compute_spectral_basis
from decflow.para import ParaproductConfig, sobolev_slope, synthesize_sobolev
from decflow.hodge import biot_savart
from decflow.flow import FlowMap, FlowState, advect_step, locate_points
from decflow.probe import embed_flow, compute_W

t0 = time.time()
mesh = flat_torus(128)
basis = compute_spectral_basis(mesh, 400)
cfg = ParaproductConfig(basis)
lam = basis.eigenvalues

pc = FlowMap.identity(mesh).plane_images()
ts = 0.1
fw = np.column_stack([pc[:, 0] + ts * np.sin(2 * np.pi * pc[:, 1]), pc[:, 1]])
iv = np.column_stack([pc[:, 0] - ts * np.sin(2 * np.pi * pc[:, 1]), pc[:, 1]])
ff, fb = locate_points(mesh, fw - np.floor(fw), plane=True)
jf, jb = locate_points(mesh, iv - np.floor(iv), plane=True)
e = embed_flow(FlowMap(mesh, ff, fb, t=ts), FlowMap(mesh, jf, jb, t=ts))
W = compute_W(e, cfg)

for lo, hi, mr in ((1, 40, 1e-10), (1, 60, 1e-10), (3, 80, 1e-9)):
    fit = (lam[lo], lam[hi])
    for j in (0, 1):
        try:
            sw = sobolev_slope(W.values[:, j], basis, fit_range=fit, mask_rel=mr)
            sp = sobolev_slope(e.phi[:, j], basis, fit_range=fit, mask_rel=mr)
            print(f"shear [{lo},{hi}] mr={mr:g} comp{j}: W {sw.slope:.2f}({sw.residual:.2f}) "
                  f"Phi {sp.slope:.2f}({sp.residual:.2f}) diff {abs(sw.slope-sp.slope):.2f}")
        except ValueError as ex:
            print(f"shear [{lo},{hi}] comp{j}: {ex}")

# rough background: H^2.2 trajectory at t=0.2 (criterion-8 flow)
rng = np.random.default_rng(11)
omega0 = synthesize_sobolev(basis, 2.2, rng)
speed = biot_savart(omega0).max_speed()
h = 1.0 / 128
n = int(np.ceil(0.2 / (0.4 * h / max(speed, 1e-9))))
dt = 0.2 / n
state = FlowState.initial(omega0)
for k in range(n):
    state = advect_step(state, dt)
e2 = embed_flow(state.forward, state.inverse)
W2 = compute_W(e2, cfg)
fit = (lam[12], lam[200])
print("rough background t=0.2:")
for j in range(mesh.ambient_dim):
    sw = sobolev_slope(W2.values[:, j], basis, fit_range=fit)
    sp = sobolev_slope(e2.phi[:, j], basis, fit_range=fit)
    print(f"  comp {j}: W {sw.slope:.2f}({sw.residual:.2f}) Phi {sp.slope:.2f}"
          f"({sp.residual:.2f}) diff {abs(sw.slope-sp.slope):.2f}")
print(f"total {time.time()-t0:.0f}s")
