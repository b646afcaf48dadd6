"""compute_U on a steady Killing rotation: norm constancy and delta trend."""
import time
import numpy as np

from decflow.meshgen import icosphere
from decflow.spectral import compute_spectral_basis
from decflow.para import ParaproductConfig
from decflow.flow import FlowMap, locate_points
from decflow.probe import embed_flow, compute_W, compute_U

t0 = time.time()
sph = icosphere(4)
sbasis = compute_spectral_basis(sph, 120)
scfg = ParaproductConfig(sbasis)

def rot_pair(angle):
    c, s = np.cos(angle), np.sin(angle)
    R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    pf, pb = locate_points(sph, sph.vertices @ R.T)
    jf, jb = locate_points(sph, sph.vertices @ R)
    return (FlowMap(sph, pf, pb, t=angle), FlowMap(sph, jf, jb, t=angle))

def U_at(tc, delta):
    Ws = []
    for ts in (tc - delta, tc, tc + delta):
        fwd, inv = rot_pair(ts)
        Ws.append(compute_W(embed_flow(fwd, inv), scfg))
    return compute_U(*Ws)

m = sph.vertex_areas
def norm(U):
    return float(np.sqrt((m[:, None] * U.values ** 2).sum()))

delta = 0.1
norms = [norm(U_at(tc, delta)) for tc in (0.15, 0.3, 0.6)]
print("rotation |U| at t=0.15/0.3/0.6: " + " ".join(f"{x:.5f}" for x in norms)
      + f"  max rel spread {max(norms)/min(norms)-1:.4f}")

U1 = U_at(0.3, 0.2)
U2 = U_at(0.3, 0.1)
U3 = U_at(0.3, 0.05)
d12 = np.sqrt((m[:, None] * (U1.values - U2.values) ** 2).sum())
d23 = np.sqrt((m[:, None] * (U2.values - U3.values) ** 2).sum())
print(f"delta-halving: |U(.2)-U(.1)| {d12:.2e}  |U(.1)-U(.05)| {d23:.2e}  "
      f"ratio {d12/d23:.2f} (4 = clean second order)")
print(f"total {time.time()-t0:.0f}s")
