"""compute_W slope tracking (shear) and compute_U constancy (rotation)."""
import time
import numpy as np

from decflow.meshgen import flat_torus, icosphere
from decflow.dec import Cochain0
from decflow.spectral import compute_spectral_basis
from decflow.para import ParaproductConfig, sobolev_slope
from decflow.flow import FlowMap, locate_points
from decflow.probe import embed_flow, compute_W, compute_U

t0 = time.time()

# --- steady shear on the torus at t = 0.1: W tracks Phi's regularity ---
mesh = flat_torus(128)
basis = compute_spectral_basis(mesh, 400)
cfg = ParaproductConfig(basis)
lam = basis.eigenvalues
fit = (lam[12], lam[200])

def shear_pair(ts):
    pc = FlowMap.identity(mesh).plane_images()
    fw = np.column_stack([pc[:, 0] + ts * np.sin(2 * np.pi * pc[:, 1]), pc[:, 1]])
    iv = np.column_stack([pc[:, 0] - ts * np.sin(2 * np.pi * pc[:, 1]), pc[:, 1]])
    ff, fb = locate_points(mesh, fw - np.floor(fw), plane=True)
    jf, jb = locate_points(mesh, iv - np.floor(iv), plane=True)
    return (FlowMap(mesh, ff, fb, t=ts), FlowMap(mesh, jf, jb, t=ts))

fwd, inv = shear_pair(0.1)
e = embed_flow(fwd, inv)
W = compute_W(e, cfg)
print("shear t=0.1 W vs Phi component slopes:")
for j in range(mesh.ambient_dim):
    sw = sobolev_slope(W.values[:, j], basis, fit_range=fit)
    sp = sobolev_slope(e.phi[:, j], basis, fit_range=fit)
    print(f"  comp {j}: W {sw.slope:.2f} (res {sw.residual:.2f})  "
          f"Phi {sp.slope:.2f} (res {sp.residual:.2f})  diff {abs(sw.slope-sp.slope):.2f}")
print(f"({time.time()-t0:.0f}s)")

# --- Killing rotation on the sphere: |U| constant in t ---
t1 = time.time()
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
print(f"rotation |U| at t=0.15/0.3/0.6: " + " ".join(f"{x:.5f}" for x in norms)
      + f"  max rel spread {max(norms)/min(norms)-1:.4f}")

U1 = U_at(0.3, 0.2)
U2 = U_at(0.3, 0.1)
U3 = U_at(0.3, 0.05)
d12 = np.sqrt((m[:, None] * (U1.values - U2.values) ** 2).sum())
d23 = np.sqrt((m[:, None] * (U2.values - U3.values) ** 2).sum())
print(f"delta-halving: |U(.2)-U(.1)| {d12:.2e}  |U(.1)-U(.05)| {d23:.2e}  "
      f"ratio {d12/d23:.2f} (4 = clean second order)")
print(f"rotation block {time.time()-t1:.0f}s, total {time.time()-t0:.0f}s")
