import numpy as np
import pytest

from decflow.dec import (
    Cochain0,
    Cochain1,
    exterior_derivative,
    codifferential,
    inner,
    norm_l2,
)
from decflow.hodge import (
    CohomologyClass,
    biot_savart,
    curl,
    divergence,
    harmonic_basis,
    hodge_decompose,
    poisson_solver,
)
from decflow.para import synthesize_sobolev


def _mean_zero(mesh, rng):
    vals = rng.standard_normal(mesh.n_vertices)
    vals -= (mesh.vertex_areas @ vals) / mesh.total_area
    return Cochain0(mesh, vals)


def test_poisson_rejects_imbalanced_rhs(torus16):
    solver = poisson_solver(torus16)
    with pytest.raises(ValueError, match="incompatible"):
        solver.solve(np.ones(torus16.n_vertices))


def test_poisson_residual_and_mean(torus16, rng):
    solver = poisson_solver(torus16)
    rhs = rng.standard_normal(torus16.n_vertices)
    rhs -= rhs.mean()
    psi = solver.solve(rhs)
    res = np.linalg.norm(torus16.stiffness @ psi - rhs)
    assert res <= 1e-9 * np.linalg.norm(rhs)
    assert abs(torus16.vertex_areas @ psi) <= 1e-12


def test_poisson_solver_is_cached(torus16):
    assert poisson_solver(torus16) is poisson_solver(torus16)


def test_harmonic_dimensions(sphere2, torus16, genus2):
    assert harmonic_basis(sphere2).dim == 0
    assert harmonic_basis(torus16).dim == 2
    assert harmonic_basis(genus2).dim == 4


def test_harmonic_cochains_are_harmonic(torus16, genus2):
    for mesh in (torus16, genus2):
        basis = harmonic_basis(mesh)
        for h in basis.cochains():
            scale = norm_l2(h)
            assert norm_l2(exterior_derivative(h)) <= 1e-9 * scale
            assert norm_l2(codifferential(h)) <= 1e-9 * scale


def test_hodge_decomposition_orthogonal_and_complete(torus16, rng):
    a = Cochain1(torus16, rng.standard_normal(torus16.n_edges))
    exact, coexact, harm = hodge_decompose(a)
    total = exact + coexact + harm
    assert np.allclose(total.values, a.values, atol=1e-9 * norm_l2(a))
    s = norm_l2(a) ** 2
    assert abs(inner(exact, coexact)) <= 1e-9 * s
    assert abs(inner(exact, harm)) <= 1e-9 * s
    assert abs(inner(coexact, harm)) <= 1e-9 * s
    # the pieces really are what their names claim
    assert norm_l2(codifferential(exact)) > 1e-3  # generic input: nonzero
    assert norm_l2(exterior_derivative(exact)) <= 1e-10 * norm_l2(a)
    assert norm_l2(codifferential(coexact)) <= 1e-8 * norm_l2(a)


def test_hodge_decompose_sphere_has_no_harmonic_part(sphere2, rng):
    a = Cochain1(sphere2, rng.standard_normal(sphere2.n_edges))
    _, _, harm = hodge_decompose(a)
    assert norm_l2(harm) == 0.0


def test_biot_savart_divergence_free(torus16, rng):
    omega = _mean_zero(torus16, rng)
    v = biot_savart(omega)
    assert norm_l2(v.divergence()) <= 1e-12 * max(norm_l2(v.oneform), 1.0)


def test_biot_savart_curl_roundtrip(torus32, torus32_basis, rng):
    omega = synthesize_sobolev(torus32_basis, 3.0, rng)
    v = biot_savart(omega)
    back = v.curl()
    err = norm_l2(back - omega) / norm_l2(omega)
    assert err <= 1e-8


def test_biot_savart_rejects_nonzero_mean(torus16):
    with pytest.raises(ValueError, match="zero mean"):
        biot_savart(Cochain0(torus16, np.ones(torus16.n_vertices)))


def test_biot_savart_cohomology_roundtrip(torus16):
    # zero vorticity, pure harmonic class: projection must recover it
    omega = Cochain0(torus16, np.zeros(torus16.n_vertices))
    target = CohomologyClass([0.8, -0.3])
    v = biot_savart(omega, cohomology=target)
    basis = harmonic_basis(torus16)
    recovered = basis.project_coefficients(v.oneform)
    assert np.allclose(recovered, target.coefficients, atol=1e-9)


def test_biot_savart_wrong_class_length(torus16):
    omega = Cochain0(torus16, np.zeros(torus16.n_vertices))
    with pytest.raises(ValueError, match="cohomology"):
        biot_savart(omega, cohomology=CohomologyClass([1.0]))


def test_cohomology_zero_constructor(sphere2, torus16, genus2):
    assert CohomologyClass.zero(sphere2).coefficients.shape == (0,)
    assert CohomologyClass.zero(torus16).coefficients.shape == (2,)
    assert CohomologyClass.zero(genus2).coefficients.shape == (4,)


def test_velocity_diagnostics(torus32, torus32_basis, rng):
    omega = synthesize_sobolev(torus32_basis, 2.5, rng)
    v = biot_savart(omega)
    assert v.energy() > 0
    assert v.max_speed() > 0
    assert v.max_speed() <= np.linalg.norm(v.field.values, axis=1).max() + 1e-15


def test_curl_and_divergence_accept_velocity(torus16, rng):
    omega = _mean_zero(torus16, rng)
    v = biot_savart(omega)
    assert np.allclose(curl(v).values, v.curl().values)
    assert np.allclose(divergence(v).values, v.divergence().values)
