"""apply_B_tilde: identity at t=0, band ratios, pseudolocality."""
import time
import numpy as np

from decflow.meshgen import flat_torus
from decflow.dec import Cochain0, norm_l2
from decflow.spectral import compute_spectral_basis
from decflow.para import ParaproductConfig
from decflow.flow import FlowMap, locate_points
from decflow.probe import embed_flow, apply_B_tilde

t0 = time.time()
mesh = flat_torus(128)
basis = compute_spectral_basis(mesh, 400)
cfg = ParaproductConfig(basis)
m = mesh.vertex_areas

def band_field(lo, hi, seed):
    rng = np.random.default_rng(seed)
    c = np.zeros(basis.size)
    c[lo:hi] = rng.standard_normal(hi - lo)
    c[lo:hi] /= np.sqrt((c[lo:hi] ** 2).sum())
    return Cochain0(mesh, basis.synthesize(c))

ident = FlowMap.identity(mesh)
e_id = embed_flow(ident, ident)

# t = 0: identity symbol
for lo, hi in ((10, 20), (40, 80)):
    om = band_field(lo, hi, 5)
    out = apply_B_tilde(om, e_id, cfg)
    rel = norm_l2(Cochain0(mesh, out.values - om.values)) / norm_l2(om)
    print(f"t=0 band[{lo},{hi}): rel err {rel:.3f}")
print(f"({time.time()-t0:.0f}s)")

# shear background at t = 0.2 via the closed-form map
t_s = 0.2
xy = mesh.plane_coords if hasattr(mesh, "plane_coords") else None
if xy is None:
    pc = FlowMap.identity(mesh).plane_images()
else:
    pc = xy
fwd_pts = np.column_stack([pc[:, 0] + t_s * np.sin(2 * np.pi * pc[:, 1]),
                           pc[:, 1]])
inv_pts = np.column_stack([pc[:, 0] - t_s * np.sin(2 * np.pi * pc[:, 1]),
                           pc[:, 1]])
f_fc, f_by = locate_points(mesh, fwd_pts - np.floor(fwd_pts), plane=True)
i_fc, i_by = locate_points(mesh, inv_pts - np.floor(inv_pts), plane=True)
fwd = FlowMap(mesh, f_fc, f_by, t=t_s)
inv = FlowMap(mesh, i_fc, i_by, t=t_s)
e_sh = embed_flow(fwd, inv)

ratios = []
for lo, hi in ((10, 20), (40, 80), (160, 320)):
    om = band_field(lo, hi, 5)
    out = apply_B_tilde(om, e_sh, cfg)
    r = norm_l2(out) / norm_l2(om)
    ratios.append(r)
    print(f"shear band[{lo},{hi}): |Bt w|/|w| = {r:.3f}")
print(f"band ratio spread: {max(ratios)/min(ratios):.2f} (factor-3 bound)")

# pseudolocality: single eigenmode k=60 -> energy share in [15, 240]
k = 60
c = np.zeros(basis.size); c[k] = 1.0
om = Cochain0(mesh, basis.synthesize(c))
out = apply_B_tilde(om, e_sh, cfg)
co = basis.analyze(out.values)
tot_sp = float((co ** 2).sum())
tot = float(m @ (out.values ** 2))
share = float((co[15:240] ** 2).sum()) / tot
print(f"mode {k} at shear: in-[k/4,4k] share {share:.3f} "
      f"(spectral/total {tot_sp/tot:.3f})")
print(f"total {time.time()-t0:.0f}s")
