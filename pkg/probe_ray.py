"""Singular spectrum of d_v Exp along the steady-shear ray."""
import time
import numpy as np

from decflow.meshgen import flat_torus
from decflow.dec import Cochain0
from decflow.spectral import compute_spectral_basis
from decflow.hodge import biot_savart
from decflow.probe import dexp_jacobian

t0 = time.time()
mesh = flat_torus(64)
basis = compute_spectral_basis(mesh, 16)
pc = mesh.vertices  # not needed; shear built from plane coords
import decflow.flow as fl
yy = fl.FlowMap.identity(mesh).plane_images()[:, 1]
a = 0.25
om_shear = Cochain0(mesh, -2.0 * np.pi * a * np.cos(2.0 * np.pi * yy))

taus = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]
prev = None
for tau in taus:
    t1 = time.time()
    v = biot_savart(Cochain0(mesh, tau * om_shear.values))
    spec = dexp_jacobian(v, basis, n_modes=12, epsilon=1e-3, workers=4)
    s = spec.singular_values
    line = (f"tau {tau:4.2f}: sv[min,max]=({s[-1]:.4f},{s[0]:.4f}) "
            f"ranks {spec.ranks} conj={spec.conjugate_candidate}")
    if prev is not None:
        line += f" |ds|max {np.abs(s - prev).max():.2e}"
    prev = s.copy()
    print(line + f" ({time.time()-t1:.0f}s)")
print(f"total {time.time()-t0:.0f}s")
