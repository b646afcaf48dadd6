"""Spectral reference solutions on the unit flat torus.

Everything here works on plain (N, N) grids sampled at x_i = i/N, y_j = j/N
with index [i, j] = (x_i, y_j), independent of any mesh structure, so it can
serve as a trusted oracle for the mesh-based solvers.
"""

from __future__ import annotations

import numpy as np

_MEAN_TOL = 1e-10


def _check_grid(omega_grid):
    w = np.asarray(omega_grid, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"expected a square grid, got shape {w.shape}")
    n = w.shape[0]
    if n < 4 or n & (n - 1):
        raise ValueError(f"grid size must be a power of two >= 4, got {n}")
    return w


def fourier_biot_savart_oracle(omega_grid):
    """Divergence-free velocity with the given vorticity, via the FFT.

    For each nonzero integer frequency xi the velocity mode is
    ``-i w_hat(xi) J xi / (2 pi |xi|^2)`` with J the quarter turn (x, y) ->
    (-y, x); the zero mode must vanish (mean-free vorticity) and carries no
    velocity.  Returns an (N, N, 2) array of velocity samples on the same
    grid.  Example: omega = sin(2 pi x) gives v = (0, -cos(2 pi x) / (2 pi)).
    """
    w = _check_grid(omega_grid)
    n = w.shape[0]
    what = np.fft.fft2(w)
    mean = abs(what[0, 0]) / n**2
    if mean > _MEAN_TOL * max(np.abs(w).max(), 1e-300):
        raise ValueError(f"vorticity grid must have zero mean (got {mean:.3e})")

    k = np.fft.fftfreq(n, d=1.0 / n)          # integer frequencies
    kx = k[:, None]
    ky = k[None, :]
    k2 = kx * kx + ky * ky
    k2[0, 0] = 1.0                             # mode excluded below
    factor = -1j * what / (2.0 * np.pi * k2)
    vx_hat = factor * (-ky)
    vy_hat = factor * kx
    vx_hat[0, 0] = 0.0
    vy_hat[0, 0] = 0.0
    # the multiplier is odd in xi, so Nyquist modes (their own mirror image)
    # cannot carry a real velocity; drop them rather than leak imaginary parts
    ny = n // 2
    for vh in (vx_hat, vy_hat):
        vh[ny, :] = 0.0
        vh[:, ny] = 0.0

    vx = np.fft.ifft2(vx_hat)
    vy = np.fft.ifft2(vy_hat)
    drift = max(np.abs(vx.imag).max(), np.abs(vy.imag).max())
    if drift > 1e-12 * max(np.abs(vx.real).max(), np.abs(vy.real).max(), 1e-300):
        raise AssertionError("velocity field came out non-real")
    return np.stack([vx.real, vy.real], axis=-1)


def grid_divergence(velocity_grid):
    """Spectral divergence of an (N, N, 2) grid velocity field."""
    v = np.asarray(velocity_grid, dtype=np.float64)
    n = v.shape[0]
    k = np.fft.fftfreq(n, d=1.0 / n)
    dx = 2j * np.pi * k[:, None]
    dy = 2j * np.pi * k[None, :]
    out = np.fft.ifft2(dx * np.fft.fft2(v[..., 0]) +
                       dy * np.fft.fft2(v[..., 1]))
    return out.real


def grid_curl(velocity_grid):
    """Spectral scalar curl (dv_y/dx - dv_x/dy) of an (N, N, 2) grid field."""
    v = np.asarray(velocity_grid, dtype=np.float64)
    n = v.shape[0]
    k = np.fft.fftfreq(n, d=1.0 / n)
    dx = 2j * np.pi * k[:, None]
    dy = 2j * np.pi * k[None, :]
    out = np.fft.ifft2(dx * np.fft.fft2(v[..., 1]) -
                       dy * np.fft.fft2(v[..., 0]))
    return out.real


def evaluate_band_limited(grid_values, points):
    """Evaluate the trigonometric interpolant of grid data at (P, 2) points.

    Cost scales with the number of nonzero Fourier modes, so this is meant
    for band-limited fields (a handful of active frequencies).  Points are
    plane coordinates on the unit torus.
    """
    g = np.asarray(grid_values, dtype=np.float64)
    scalar = g.ndim == 2
    if scalar:
        g = g[..., None]
    n = g.shape[0]
    pts = np.asarray(points, dtype=np.float64)
    k = np.fft.fftfreq(n, d=1.0 / n)
    out = np.zeros((len(pts), g.shape[-1]))
    for c in range(g.shape[-1]):
        ghat = np.fft.fft2(g[..., c]) / n**2
        # Nyquist rows/columns are split symmetrically so the interpolant is
        # real and matches the grid samples
        nyq = n // 2
        ghat[nyq, :] *= 0.5
        ghat[:, nyq] *= 0.5
        mask = np.abs(ghat) > 1e-13 * max(np.abs(ghat).max(), 1e-300)
        ki, kj = np.nonzero(mask)
        for a, b in zip(ki, kj):
            # each halved Nyquist coefficient fans out to both signs of its
            # frequency (the corner mode to all four combinations)
            kxs = (k[a], -k[a]) if a == nyq else (k[a],)
            kys = (k[b], -k[b]) if b == nyq else (k[b],)
            for ka in kxs:
                for kb in kys:
                    phase = 2j * np.pi * (ka * pts[:, 0] + kb * pts[:, 1])
                    out[:, c] += (ghat[a, b] * np.exp(phase)).real
    return out[:, 0] if scalar else out
