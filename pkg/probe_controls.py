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
win = (lam[25], lam[350])
rng = np.random.default_rng(42)

f = synthesize_sobolev(basis, 2.5, rng)
h = synthesize_sobolev(basis, 2.5, rng)
sf = sobolev_slope(f, basis, fit_range=win).slope
sh = sobolev_slope(h, basis, fit_range=win).slope
need = max(sf, sh) + 0.4
rem = bony_remainder(f, h, cfg)
sr = sobolev_slope(rem, basis, fit_range=win)
ctrl = paraproduct(h, f, cfg)
sc = sobolev_slope(ctrl, basis, fit_range=win).slope
print(f"inputs {sf:.2f}/{sh:.2f}; remainder {sr.slope:.2f} res={sr.residual:.3f} "
      f"(need>={need:.2f}); control Pi_h f {sc:.2f} (must < {need:.2f})")

cf = np.zeros(400)
cf[1:6] = [1.0, -0.7, 0.4, 0.9, -0.3]
f_smooth = Cochain0(mesh, basis.synthesize(cf))
for seeds in ((7, 8), (17, 18), (27, 28)):
    d1 = synthesize_sobolev(basis, 2.2, np.random.default_rng(seeds[0]))
    d2 = synthesize_sobolev(basis, 2.2, np.random.default_rng(seeds[1]))
    sd = sobolev_slope(Cochain0(mesh, d1.values), basis, fit_range=win).slope
    f_rough = synthesize_sobolev(basis, 2.2, np.random.default_rng(seeds[0] + 100))
    for ampk in (3.0, 6.0):
        amp = ampk * mesh.edge_lengths.mean() / max(np.abs(d1.values).max(),
                                                    np.abs(d2.values).max())
        disp = amp * np.stack([d1.values, d2.values], 1)
        faces, barys = locate_points(mesh, mesh.plane_coords + disp, plane=True)
        phi = FlowMap(mesh, faces, barys, t=0.0)
        kf = paracomposition(f_smooth, phi, cfg)
        sk = sobolev_slope(kf, basis, fit_range=win)
        kfr = paracomposition(f_rough, phi, cfg)
        skr = sobolev_slope(kfr, basis, fit_range=win).slope
        print(f"seeds={seeds} amp={ampk:3.0f}h: disp={sd:.2f} "
              f"K={sk.slope:.2f} res={sk.residual:.3f} (need>={sd+0.4:.2f}) "
              f"K(rough f)={skr:.2f} (must < {sd+0.4:.2f})")
