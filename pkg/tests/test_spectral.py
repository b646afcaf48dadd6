import numpy as np
import pytest

from decflow.spectral import SpectralBasis, compute_spectral_basis


def test_first_mode_is_constant(torus32_basis):
    lam = torus32_basis.eigenvalues
    assert lam[0] == 0.0
    v0 = torus32_basis.modes[:, 0]
    assert np.allclose(v0, v0[0], atol=1e-14)
    assert np.all(np.diff(lam) >= -1e-10)


def test_torus_eigenvalues_match_fourier(torus64_basis):
    # flat unit torus: lambda = 4 pi^2 (k^2 + l^2), each nonzero pair giving
    # multiplicity >= 2.  Check the discrete values against the continuum,
    # grouped by |k|^2 <= 16.
    expected = []
    for k in range(-8, 9):
        for l in range(-8, 9):
            q = k * k + l * l
            if 0 < q <= 16:
                expected.append(4.0 * np.pi ** 2 * q)
    expected = np.sort(expected)
    lam = torus64_basis.eigenvalues[1:]
    n = min(len(lam), len(expected))
    rel = np.abs(lam[:n] - expected[:n]) / expected[:n]
    q_vals = expected[:n] / (4.0 * np.pi ** 2)
    assert rel[q_vals <= 9.5].max() < 0.01
    assert rel.max() < 0.015


def test_sphere_eigenvalues_match_spherical_harmonics(sphere5_basis36):
    # unit sphere: lambda_l = l(l+1) with multiplicity 2l+1
    lam = sphere5_basis36.eigenvalues
    idx = 1
    for l in range(1, 6):
        mult = 2 * l + 1
        if idx + mult > len(lam):
            break
        group = lam[idx:idx + mult]
        assert np.allclose(group, l * (l + 1), rtol=0.02)
        idx += mult


def test_modes_orthonormal(torus64_basis):
    mass = torus64_basis.mesh.vertex_areas
    gram = (torus64_basis.modes * mass[:, None]).T @ torus64_basis.modes
    assert np.abs(gram - np.eye(torus64_basis.size)).max() <= 1e-8


def test_analyze_synthesize_roundtrip(torus32_basis, rng):
    coeffs = rng.standard_normal(torus32_basis.size)
    back = torus32_basis.analyze(torus32_basis.synthesize(coeffs))
    assert np.allclose(back, coeffs, atol=1e-10)


def test_project_is_idempotent(torus32_basis, rng):
    values = rng.standard_normal(torus32_basis.mesh.n_vertices)
    once = torus32_basis.project(values)
    twice = torus32_basis.project(once)
    assert np.allclose(twice, once, atol=1e-12)


def test_truncation_residual_limits(torus32_basis, rng):
    in_span = torus32_basis.synthesize(rng.standard_normal(torus32_basis.size))
    assert torus32_basis.truncation_residual(in_span) <= 1e-7
    assert torus32_basis.truncation_residual(np.zeros_like(in_span)) == 0.0
    rough = rng.standard_normal(torus32_basis.mesh.n_vertices)
    r = torus32_basis.truncation_residual(rough)
    assert 0.0 < r <= 1.0 + 1e-12


def test_compute_basis_deterministic(torus32):
    a = compute_spectral_basis(torus32, 20)
    b = compute_spectral_basis(torus32, 20)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.modes, b.modes)


def test_n_modes_validation(torus8):
    with pytest.raises(ValueError, match="n_modes"):
        compute_spectral_basis(torus8, 0)
    with pytest.raises(ValueError, match="n_modes"):
        compute_spectral_basis(torus8, torus8.n_vertices + 1)


def test_full_basis_on_tiny_mesh(torus8, rng):
    basis = compute_spectral_basis(torus8, torus8.n_vertices)
    values = rng.standard_normal(torus8.n_vertices)
    assert np.allclose(basis.project(values), values, atol=1e-8)
