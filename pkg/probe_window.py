import numpy as np

from decflow.meshgen import flat_torus
from decflow.dec import Cochain0
from decflow.spectral import compute_spectral_basis
from decflow.para import (ParaproductConfig, paraproduct, bony_remainder,
                          paracomposition, sobolev_slope, synthesize_sobolev)
from decflow.flow import FlowMap, locate_points

mesh = flat_torus(128)
basis = compute_spectral_basis(mesh, 400)
cfg = ParaproductConfig(basis)
lam = basis.eigenvalues
rng = np.random.default_rng(42)

f = synthesize_sobolev(basis, 2.5, rng)
h = synthesize_sobolev(basis, 2.5, rng)
rem = bony_remainder(f, h, cfg)
half = Cochain0(mesh, f.values * h.values - paraproduct(h, f, cfg).values)

d1 = synthesize_sobolev(basis, 2.2, rng)
d2 = synthesize_sobolev(basis, 2.2, rng)
amp = 6.0 * mesh.edge_lengths.mean() / max(np.abs(d1.values).max(),
                                           np.abs(d2.values).max())
disp = amp * np.stack([d1.values, d2.values], 1)
faces, barys = locate_points(mesh, mesh.plane_coords + disp, plane=True)
phi = FlowMap(mesh, faces, barys, t=0.0)
cf = np.zeros(400)
cf[1:6] = [1.0, -0.7, 0.4, 0.9, -0.3]
f_smooth = Cochain0(mesh, basis.synthesize(cf))
kf = paracomposition(f_smooth, phi, cfg)
pull = Cochain0(mesh, np.einsum(
    "vk,vk->v", f_smooth.values[mesh.faces[phi.faces]], phi.barys))

for name, win in [("[25, end]", (lam[25], np.inf)),
                  ("[12, 300]", (lam[12], lam[300])),
                  ("[12, 350]", (lam[12], lam[350])),
                  ("[25, 350]", (lam[25], lam[350])),
                  ("[12, 250]", (lam[12], lam[250]))]:
    sf = sobolev_slope(f, basis, fit_range=win).slope
    sr = sobolev_slope(rem, basis, fit_range=win).slope
    sc = sobolev_slope(half, basis, fit_range=win).slope
    sd = sobolev_slope(Cochain0(mesh, d1.values), basis, fit_range=win).slope
    sk = sobolev_slope(kf, basis, fit_range=win).slope
    sp = sobolev_slope(pull, basis, fit_range=win).slope
    print(f"{name}: f={sf:.2f} rem={sr:.2f} ctrl={sc:.2f} "
          f"(need>={sf+0.4:.2f});  disp={sd:.2f} K={sk:.2f} pull={sp:.2f} "
          f"(need>={sd+0.4:.2f})")
