import numpy as np
import pytest

from decflow.dec import Cochain0
from decflow.flow import (
    CFLError,
    Diagnostics,
    FlowMap,
    FlowState,
    advect_step,
    compose_maps,
    evaluate_map,
    exp_map,
    invert_flow_map,
    locate_points,
    pushforward_area_error,
    run_euler,
)
from decflow.hodge import CohomologyClass, biot_savart


def shear_vorticity(mesh, amplitude=1.0):
    """omega = -2 pi a cos(2 pi y): the steady shear u = (a sin(2 pi y), 0)."""
    y = mesh.plane_coords[:, 1]
    return Cochain0(mesh, -2.0 * np.pi * amplitude * np.cos(2.0 * np.pi * y))


def test_identity_flow_map(torus16):
    ident = FlowMap.identity(torus16)
    assert ident.is_identity()
    assert np.allclose(ident.plane_images(), torus16.plane_coords, atol=1e-15)


def test_locate_points_roundtrip_plane(torus32, rng):
    pts = rng.random((200, 2))
    faces, barys = locate_points(torus32, pts, plane=True)
    back = np.einsum("pkx,pk->px", torus32.plane_corners[faces], barys)
    back -= np.floor(back)
    err = np.abs(back - pts)
    err = np.minimum(err, 1.0 - err)  # periodic distance
    assert err.max() <= 1e-12
    assert np.all(barys >= -1e-12) and np.allclose(barys.sum(axis=1), 1.0)


def test_locate_points_embedded(sphere3, rng):
    # points slightly off the sphere surface land in a nearby face
    vecs = rng.standard_normal((100, 3))
    pts = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
    faces, barys = locate_points(sphere3, pts)
    img = np.einsum("pkm,pk->pm", sphere3.vertices[sphere3.faces[faces]], barys)
    chord = np.linalg.norm(img - pts, axis=1)
    assert chord.max() <= sphere3.edge_lengths.max()


def test_evaluate_and_compose(torus32, rng):
    pts = rng.random((50, 2))
    faces, barys = locate_points(torus32, pts, plane=True)
    faces2, barys2 = evaluate_map(FlowMap.identity(torus32), faces, barys)
    assert faces2.shape == (50,)
    assert np.allclose(barys2.sum(axis=1), 1.0)
    ident = FlowMap.identity(torus32)
    comp = compose_maps(ident, ident)
    assert comp.is_identity()


def test_invert_analytic_map_roundtrip(torus32):
    # exact closed-form shear placement inverts to rounding
    pc = torus32.plane_coords.copy()
    pc[:, 0] += 0.2 * np.sin(2.0 * np.pi * pc[:, 1])
    faces, barys = locate_points(torus32, pc - np.floor(pc), plane=True)
    phi = FlowMap(torus32, faces, barys, t=0.2)
    inv = invert_flow_map(phi)
    comp = compose_maps(inv, phi)
    disp = comp.plane_images() - torus32.plane_coords
    disp -= np.round(disp)
    assert np.abs(disp).max() <= 1e-12


def test_invert_advected_map_roundtrip(torus32):
    omega = shear_vorticity(torus32, amplitude=0.2)
    traj = run_euler(omega, None, T=0.2, dt=0.025)
    phi = traj.final.forward
    inv = invert_flow_map(phi)
    comp = compose_maps(inv, phi)
    disp = comp.plane_images() - torus32.plane_coords
    disp -= np.round(disp)
    assert np.abs(disp).max() <= 1e-4


def test_cfl_guard(torus16):
    omega = shear_vorticity(torus16, amplitude=5.0)
    state = FlowState.initial(omega)
    with pytest.raises(CFLError, match="CFL"):
        advect_step(state, dt=1.0)


def test_advect_step_rejects_bad_dt(torus16):
    state = FlowState.initial(shear_vorticity(torus16, 0.1))
    with pytest.raises(ValueError, match="dt"):
        advect_step(state, dt=-0.1)


def test_run_euler_validations(torus16):
    omega = shear_vorticity(torus16, 0.1)
    with pytest.raises(ValueError, match="mean-zero"):
        run_euler(Cochain0(torus16, np.ones(torus16.n_vertices)), None, 1.0, 0.1)
    with pytest.raises(ValueError, match="integer number of steps"):
        run_euler(omega, None, T=1.0, dt=0.3)
    with pytest.raises(ValueError):
        run_euler(omega, None, T=-1.0, dt=0.1)


def test_run_euler_time_zero(torus16):
    omega = shear_vorticity(torus16, 0.1)
    traj = run_euler(omega, None, T=0.0, dt=0.1)
    assert len(traj.states) == 1
    assert traj.final.forward.is_identity()
    assert traj.diagnostics[0].t == 0.0


def test_run_euler_snapshot_stride(torus16):
    omega = shear_vorticity(torus16, 0.1)
    traj = run_euler(omega, None, T=0.5, dt=0.05, snapshot_stride=2)
    # initial + steps 2,4,6,8,10 (final shares step 10)
    assert len(traj.states) == 6
    assert len(traj.diagnostics) == 11
    times = [s.t for s in traj.states]
    assert times == pytest.approx([0.0, 0.1, 0.2, 0.3, 0.4, 0.5])


def test_steady_shear_is_preserved(torus32):
    omega = shear_vorticity(torus32)
    traj = run_euler(omega, None, T=0.1, dt=0.0125)
    drift = traj.final.omega.values - omega.values
    rel = np.linalg.norm(drift) / np.linalg.norm(omega.values)
    assert rel <= 1e-10  # rows of constant vorticity advect onto themselves


def test_exp_of_zero_is_identity(torus16):
    v = biot_savart(Cochain0(torus16, np.zeros(torus16.n_vertices)))
    phi = exp_map(v)
    assert phi.is_identity()
    assert pushforward_area_error(phi) <= 1e-14


def test_exp_map_matches_shear_closed_form(torus32):
    # u = (a sin(2 pi y), 0) is steady; Exp(v) translates x by a sin(2 pi y)
    a = 0.2
    v = biot_savart(shear_vorticity(torus32, a))
    phi = exp_map(v, n_steps=40)
    img = phi.plane_images()
    expected = torus32.plane_coords.copy()
    expected[:, 0] += a * np.sin(2.0 * np.pi * expected[:, 1])
    err = np.abs(img - expected)
    err = np.minimum(err, 1.0 - err)
    assert err.max() <= 1e-2


def test_exp_area_error_small(torus32):
    v = biot_savart(shear_vorticity(torus32, 0.2))
    phi = exp_map(v, n_steps=40)
    assert pushforward_area_error(phi) <= 5e-2


def test_diagnostics_fields(torus32):
    omega = shear_vorticity(torus32, 0.3)
    state = FlowState.initial(omega)
    d = Diagnostics.measure(state)
    assert d.t == 0.0
    assert d.energy > 0
    assert d.enstrophy > 0
    assert d.omega_min <= d.omega_max
    assert d.div_residual <= 1e-10
    assert d.area_error == 0.0
    after = Diagnostics.measure(advect_step(state, 0.01))
    assert after.t == pytest.approx(0.01)
    assert abs(after.energy - d.energy) / d.energy <= 1e-2


def test_energy_and_enstrophy_conservation_generic(torus64, torus64_basis, rng):
    from decflow.para import synthesize_sobolev

    omega = synthesize_sobolev(torus64_basis, 2.5, rng)
    traj = run_euler(omega, None, T=0.1, dt=0.0125)
    e = [d.energy for d in traj.diagnostics]
    z = [d.enstrophy for d in traj.diagnostics]
    assert abs(e[-1] - e[0]) / e[0] <= 1e-2
    assert abs(z[-1] - z[0]) / z[0] <= 5e-2
    # monotone bound on vorticity extrema (clamped transport)
    w_max0 = traj.diagnostics[0].omega_max
    assert traj.diagnostics[-1].omega_max <= w_max0 * 1.01


def test_cohomology_carried_through_flow(torus16):
    omega = shear_vorticity(torus16, 0.05)
    klass = CohomologyClass([0.1, 0.0])
    traj = run_euler(omega, klass, T=0.1, dt=0.05)
    assert traj.final.cohomology is klass
