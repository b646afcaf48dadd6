"""W slope tracking with the smooth embedding carrier removed."""
import time
import numpy as np

from decflow.meshgen import flat_torus
from decflow.spectral import compute_spectral_basis
from decflow.para import (ParaproductConfig, sobolev_slope, synthesize_sobolev,
                          vector_paraproduct)
from decflow.hodge import biot_savart
from decflow.flow import FlowMap, FlowState, advect_step, locate_points
from decflow.probe import embed_flow, compute_W

t0 = time.time()
mesh = flat_torus(128)
basis = compute_spectral_basis(mesh, 400)
cfg = ParaproductConfig(basis)
lam = basis.eigenvalues
iota = mesh.vertices

def track(tag, e, fit):
    disp = e.phi - iota
    wd = vector_paraproduct(e.dpsi, disp, cfg)
    for j in range(mesh.ambient_dim):
        amp = np.abs(disp[:, j]).max()
        if amp < 1e-12:
            print(f"  {tag} comp {j}: no displacement content")
            continue
        sw = sobolev_slope(wd[:, j], basis, fit_range=fit)
        sp = sobolev_slope(disp[:, j], basis, fit_range=fit)
        print(f"  {tag} comp {j}: W' {sw.slope:.2f}({sw.residual:.2f}) "
              f"Phi' {sp.slope:.2f}({sp.residual:.2f}) diff {abs(sw.slope-sp.slope):.2f}")

# shear at t = 0.1
pc = FlowMap.identity(mesh).plane_images()
ts = 0.1
fw = np.column_stack([pc[:, 0] + ts * np.sin(2 * np.pi * pc[:, 1]), pc[:, 1]])
iv = np.column_stack([pc[:, 0] - ts * np.sin(2 * np.pi * pc[:, 1]), pc[:, 1]])
ff, fb = locate_points(mesh, fw - np.floor(fw), plane=True)
jf, jb = locate_points(mesh, iv - np.floor(iv), plane=True)
e = embed_flow(FlowMap(mesh, ff, fb, t=ts), FlowMap(mesh, jf, jb, t=ts))
print("shear t=0.1 (window [3,80]):")
track("shear", e, (lam[3], lam[80]))

# rough background at t = 0.2
rng = np.random.default_rng(11)
omega0 = synthesize_sobolev(basis, 2.2, rng)
speed = biot_savart(omega0).max_speed()
n = int(np.ceil(0.2 / (0.4 / 128 / max(speed, 1e-9))))
state = FlowState.initial(omega0)
for k in range(n):
    state = advect_step(state, 0.2 / n)
e2 = embed_flow(state.forward, state.inverse)
print("rough t=0.2 (window [12,200]):")
track("rough", e2, (lam[12], lam[200]))
print(f"total {time.time()-t0:.0f}s")

# vector-combined spectra
def vec_slope(vals, fit):
    C = np.column_stack([basis.analyze(vals[:, j]) for j in range(vals.shape[1])])
    amp = np.sqrt((C ** 2).sum(axis=1))
    return sobolev_slope(basis.synthesize(amp), basis, fit_range=fit)

for tag, emb, fit in (("shear", e, (lam[3], lam[80])),
                      ("rough", e2, (lam[12], lam[200]))):
    disp = emb.phi - iota
    wd = vector_paraproduct(emb.dpsi, disp, cfg)
    sw = vec_slope(wd, fit)
    sp = vec_slope(disp, fit)
    print(f"{tag} vector: W' {sw.slope:.2f}({sw.residual:.2f}) Phi' {sp.slope:.2f}"
          f"({sp.residual:.2f}) diff {abs(sw.slope-sp.slope):.2f}")
