"""Rotation U smallness; FD order measured on a genuinely unsteady flow."""
import time
import numpy as np

from decflow.meshgen import icosphere, flat_torus
from decflow.spectral import compute_spectral_basis
from decflow.para import ParaproductConfig, synthesize_sobolev
from decflow.hodge import biot_savart
from decflow.flow import FlowMap, FlowState, advect_step, locate_points
from decflow.probe import embed_flow, compute_W, compute_U

t0 = time.time()
sph = icosphere(4)
sbasis = compute_spectral_basis(sph, 120)
scfg = ParaproductConfig(sbasis)
m = sph.vertex_areas

def rot_pair(angle):
    c, s = np.cos(angle), np.sin(angle)
    R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    pf, pb = locate_points(sph, sph.vertices @ R.T)
    jf, jb = locate_points(sph, sph.vertices @ R)
    return (FlowMap(sph, pf, pb, t=angle), FlowMap(sph, jf, jb, t=angle))

def U_at(tc, delta):
    Ws = [compute_W(embed_flow(*rot_pair(ts)), scfg)
          for ts in (tc - delta, tc, tc + delta)]
    return compute_U(*Ws)

# Killing speed scale |v| = |e_phi sin(theta)| ~ O(1)
vnorm = float(np.sqrt(m @ (sph.vertices[:, 0] ** 2 + sph.vertices[:, 1] ** 2)))
for delta in (0.1, 0.4):
    norms = [float(np.sqrt((m[:, None] * U_at(tc, delta).values ** 2).sum()))
             for tc in (0.15, 0.3, 0.6)]
    print(f"rotation delta={delta}: |U|/|v| = " +
          " ".join(f"{x/vnorm:.4f}" for x in norms))
print(f"({time.time()-t0:.0f}s)")

# FD order on the rough torus trajectory
mesh = flat_torus(128)
basis = compute_spectral_basis(mesh, 400)
cfg = ParaproductConfig(basis)
rng = np.random.default_rng(11)
omega0 = synthesize_sobolev(basis, 2.2, rng)
speed = biot_savart(omega0).max_speed()
n = int(np.ceil(0.2 / (0.4 / 128 / max(speed, 1e-9))))
dt = 0.2 / n
state = FlowState.initial(omega0)
snaps = {}
want = {n - 8, n - 4, n - 2, n, n + 2, n + 4, n + 8}
for k in range(1, n + 9):
    state = advect_step(state, dt)
    if k in want:
        snaps[k] = state
Wc = {k: compute_W(embed_flow(s.forward, s.inverse), cfg)
      for k, s in snaps.items()}
mU = mesh.vertex_areas
Us = {j: compute_U(Wc[n - j], Wc[n], Wc[n + j]) for j in (2, 4, 8)}
d84 = np.sqrt((mU[:, None] * (Us[8].values - Us[4].values) ** 2).sum())
d42 = np.sqrt((mU[:, None] * (Us[4].values - Us[2].values) ** 2).sum())
print(f"rough delta-halving: |U(8dt)-U(4dt)| {d84:.3e} |U(4dt)-U(2dt)| {d42:.3e} "
      f"ratio {d84/d42:.2f}")
print(f"total {time.time()-t0:.0f}s")
