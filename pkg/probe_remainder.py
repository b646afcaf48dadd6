import numpy as np

from decflow.meshgen import flat_torus
from decflow.dec import Cochain0
from decflow.spectral import compute_spectral_basis
from decflow.para import (ParaproductConfig, paraproduct, bony_remainder,
                          sobolev_slope, synthesize_sobolev)

mesh = flat_torus(128)
basis = compute_spectral_basis(mesh, 400)
cfg = ParaproductConfig(basis)
lam = basis.eigenvalues

def mode(k):
    return Cochain0(mesh, basis.modes[:, k].copy())

# single-pair cancellation: f low, h high
for j, k in [(5, 350), (20, 350), (60, 350), (120, 350), (200, 350),
             (20, 100), (50, 100), (5, 20)]:
    f, h = mode(j), mode(k)
    prod = f.values * h.values
    p1 = paraproduct(f.values, h.values, cfg).values   # f modulates (low)
    p2 = paraproduct(h.values, f.values, cfg).values   # h modulates
    rem = prod - p1 - p2
    cp = basis.analyze(prod)
    cr = basis.analyze(rem)
    c1 = basis.analyze(p1)
    print(f"j={j:3d} k={k:3d} lam_j/lam_k={lam[j]/lam[k]:.3f}  "
          f"|fh|={np.linalg.norm(cp):.3e} |Pi_f h|={np.linalg.norm(c1):.3e} "
          f"|R|={np.linalg.norm(cr):.3e} ratio={np.linalg.norm(cr)/max(np.linalg.norm(cp),1e-300):.3f}")

# where does the remainder energy sit for the H^2.5 corpus?
rng = np.random.default_rng(42)
f = synthesize_sobolev(basis, 2.5, rng)
h = synthesize_sobolev(basis, 2.5, rng)
rem = bony_remainder(f, h, cfg)
cr = basis.analyze(rem.values)
cf = basis.analyze(f.values)
edges = [1, 3, 6, 12, 25, 50, 100, 200, 399]
print("octave profile (mode index ranges): remainder vs f")
for a, b in zip(edges[:-1], edges[1:]):
    ar = np.sqrt((cr[a:b] ** 2).mean())
    af = np.sqrt((cf[a:b] ** 2).mean())
    print(f"  modes {a:3d}-{b:3d} lam~{lam[(a+b)//2]:8.1f}  |R|~{ar:.3e}  |f|~{af:.3e}")
