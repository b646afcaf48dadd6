"""Which stage of apply_B_tilde at t=0 loses the low bands?"""
import time
import numpy as np

from decflow.meshgen import flat_torus
from decflow.dec import Cochain0, norm_l2
from decflow.spectral import compute_spectral_basis
from decflow.para import ParaproductConfig, paracomposition, vector_paraproduct
from decflow.hodge import biot_savart, curl
from decflow.flow import FlowMap
from decflow.probe import VertexField, embed_flow

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

for lo, hi in ((10, 20), (40, 80)):
    om = band_field(lo, hi, 5)
    rel = lambda a, b: float(np.sqrt(m @ (a - b) ** 2 / max(m @ b ** 2, 1e-300)))

    # (c) scalar paracomposition by the identity map
    kom = paracomposition(om, ident, cfg)
    print(f"[{lo},{hi}) K_id(om) vs om: {rel(np.asarray(kom.values), om.values):.2e}")

    v = biot_savart(om)
    vv = v.field.vertex_vectors()

    # (a) flat/curl sandwich alone
    beta = VertexField(mesh, vv).tangential().flat()
    w_back = curl(beta)
    print(f"[{lo},{hi}) curl(flat(vv)) vs om: {rel(w_back.values, om.values):.2e}")

    # native-cochain curl for reference
    print(f"[{lo},{hi}) curl(native) vs om: {rel(curl(v.oneform).values, om.values):.2e}")

    # (b) vector paraproduct with the identity-projector slot
    pv = vector_paraproduct(e_id.dpsi, vv, cfg)
    print(f"[{lo},{hi}) Pi_P(vv) vs vv: "
          f"{np.linalg.norm(pv - vv) / np.linalg.norm(vv):.2e}")

    # (b') then through the sandwich
    beta2 = VertexField(mesh, pv).tangential().flat()
    print(f"[{lo},{hi}) curl(flat(Pi_P vv)) vs om: {rel(curl(beta2).values, om.values):.2e}")
    # component paracomposition of vv by identity
    kvv = np.column_stack([np.asarray(paracomposition(vv[:, j], ident, cfg).values)
                           for j in range(vv.shape[1])])
    print(f"[{lo},{hi}) K_id(vv) vs vv: {np.linalg.norm(kvv - vv)/np.linalg.norm(vv):.2e}")
print(f"total {time.time()-t0:.0f}s")
