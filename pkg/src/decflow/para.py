"""Paradifferential calculus in a truncated Laplace eigenbasis.

The frequency decomposition is a continuous Littlewood-Paley family built
from heat-kernel windows: with ``psi(x) = c0 x^N e^{-x} (1 - e^{-x})``
normalized so that ``int_0^inf psi(u) du/u = 1``, every spectral multiplier
used here is a closed-form incomplete-gamma expression, and the Calderon
reproducing integral over t is discretized by the trapezoid rule in log t.
That rule is spectrally accurate for these integrands (their Mellin
transforms decay exponentially), so the node count controls only the tail
truncation, not a power-law quadrature error.

The paraproduct splits a pointwise product by frequency: ``paraproduct(h,
f)`` keeps the part where ``f`` carries the high frequencies and ``h`` is
lowpassed.  Modulating by the constant 1 reproduces the mean-free part of
``f`` to quadrature accuracy.  ``paracomposition`` transfers a function
along a flow map while stripping the paraproduct couplings to the map's
embedding coordinates, which is what makes its output smoother than a naive
pullback.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import gamma, gammaincc

from .dec import Cochain0, _corner_gradients
from .spectral import SpectralBasis

_WINDOW_NAMES = ("psi", "phi", "psi_tilde", "phi_tilde")


def _upper_gamma(s, x):
    """Unregularized upper incomplete gamma for positive integer-ish s."""
    return gammaincc(s, x) * gamma(s)


def _window_raw(x, which, n_vanishing):
    """Closed-form window values; see the module docstring for definitions."""
    x = np.asarray(x, dtype=np.float64)
    N = int(n_vanishing)
    if N < 1:
        raise ValueError("vanishing order must be >= 1")
    c0 = 1.0 / (gamma(N) * (1.0 - 2.0 ** (-N)))
    pos = x > 0

    if which == "psi":
        out = np.zeros_like(x)
        xs = x[pos]
        out[pos] = c0 * np.exp(N * np.log(xs) - xs) * (-np.expm1(-xs))
        return out
    if which == "psi_tilde":
        out = np.zeros_like(x)
        xs = x[pos]
        out[pos] = c0 * np.exp((N - 1) * np.log(xs) - xs) * (-np.expm1(-xs))
        return out
    if which == "phi":
        return -c0 * (_upper_gamma(N + 1, x)
                      - 2.0 ** (-(N + 1)) * _upper_gamma(N + 1, 2.0 * x))
    if which == "phi_tilde":
        return -c0 * (_upper_gamma(N, x)
                      - 2.0 ** (-N) * _upper_gamma(N, 2.0 * x))
    raise ValueError(f"unknown window {which!r}; expected one of {_WINDOW_NAMES}")


def window(x, which, cfg):
    """Evaluate one of the four Littlewood-Paley windows at x >= 0.

    ``psi`` is the band window, ``phi(x) = -int_x^inf psi`` the lowpass
    primitive, and the tilde variants divide the integrand by its argument:
    ``psi_tilde = psi(x)/x`` and ``phi_tilde(x) = -int_x^inf psi(y)/y dy``,
    so ``phi_tilde(0) = -1`` by the Calderon normalization.
    """
    return _window_raw(x, which, cfg.n_vanishing)


@dataclass
class ParaproductConfig:
    """Quadrature and window tables for one spectral basis.

    ``t_min``/``t_max`` default to 0.25/lambda_max and 25/lambda_1 so the
    smallest and largest active frequencies both sit deep in the window
    tails at the ends of the node range.
    """

    basis: SpectralBasis
    n_vanishing: int = 8
    n_quad: int = 64
    t_min: float = 0.0
    t_max: float = 0.0

    def __post_init__(self):
        lam = self.basis.eigenvalues
        if len(lam) < 2 or lam[1] <= 0:
            raise ValueError("paraproducts need at least one nonzero eigenvalue")
        if self.n_quad < 8:
            raise ValueError("need at least 8 quadrature nodes")
        if not self.t_min:
            self.t_min = 0.25 / lam[-1]
        if not self.t_max:
            self.t_max = 25.0 / lam[1]
        if not self.t_max > self.t_min:
            raise ValueError("empty quadrature range")

    @cached_property
    def nodes(self):
        return np.geomspace(self.t_min, self.t_max, self.n_quad)

    @cached_property
    def weights(self):
        """Trapezoid weights for integration against dt/t."""
        dlog = np.log(self.t_max / self.t_min) / (self.n_quad - 1)
        w = np.full(self.n_quad, dlog)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    @cached_property
    def _tables(self):
        """(M, Q) window tables at t_q * lambda_k."""
        X = self.basis.eigenvalues[:, None] * self.nodes[None, :]
        N = self.n_vanishing
        psi = _window_raw(X, "psi", N)
        psi_t = _window_raw(X, "psi_tilde", N)
        phi_t = _window_raw(X, "phi_tilde", N)
        return {"psi": psi, "psi_tilde": psi_t, "phi_tilde": phi_t,
                "x_phi_tilde": X * phi_t}

    def rescaled(self, **changes):
        kw = dict(basis=self.basis, n_vanishing=self.n_vanishing,
                  n_quad=self.n_quad, t_min=self.t_min, t_max=self.t_max)
        kw.update(changes)
        return ParaproductConfig(**kw)


def _as_values(f):
    if isinstance(f, Cochain0):
        return f.values
    arr = np.asarray(f, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("expected a vertex scalar field")
    return arr


def paraproduct(h, f, cfg):
    """Low-high paraproduct: h modulates the low frequencies of the product.

    Computed as the Calderon integral of
    ``psi_tilde(tL)[(tL phi_tilde(tL) f) (phi_tilde(tL) h)]
      + phi_tilde(tL)[(psi(tL) f) (phi_tilde(tL) h)]``
    against dt/t, with all multipliers evaluated in the truncated eigenbasis.
    With h = 1 this returns the mean-free part of f to quadrature accuracy.
    """
    basis = cfg.basis
    mesh = basis.mesh
    fh = basis.analyze(_as_values(f))
    hh = basis.analyze(_as_values(h))
    tab = cfg._tables
    U = basis.modes

    A1 = U @ (tab["x_phi_tilde"] * fh[:, None])   # (V, Q) high-pass carrier
    A2 = U @ (tab["psi"] * fh[:, None])
    B = U @ (tab["phi_tilde"] * hh[:, None])      # (V, Q) low-pass modulator

    W = basis._weighted                           # mass-weighted modes
    C1 = W.T @ (A1 * B)                           # (M, Q)
    C2 = W.T @ (A2 * B)
    out_hat = (tab["psi_tilde"] * C1 + tab["phi_tilde"] * C2) @ cfg.weights
    return Cochain0(mesh, U @ out_hat)


def bony_remainder(f, h, cfg):
    """Pointwise product minus both paraproducts (the smoothing remainder)."""
    fv = _as_values(f)
    hv = _as_values(h)
    both = fv * hv
    p1 = paraproduct(hv, fv, cfg).values
    p2 = paraproduct(fv, hv, cfg).values
    return Cochain0(cfg.basis.mesh, both - p1 - p2)


def vector_paraproduct(A, V, cfg):
    """Matrix-vector paraproduct: out_i = sum_j paraproduct(A[:, i, j], V[:, j]).

    ``A`` is a per-vertex matrix field (V, m, m) of low-frequency modulators
    and ``V`` a per-vertex vector field (V, m).
    """
    A = np.asarray(A, dtype=np.float64)
    Vv = np.asarray(V, dtype=np.float64)
    n_vert = cfg.basis.mesh.n_vertices
    if A.ndim != 3 or A.shape[0] != n_vert or A.shape[1] != A.shape[2]:
        raise ValueError(f"matrix field must be (V, m, m), got {A.shape}")
    m = A.shape[1]
    if Vv.shape != (n_vert, m):
        raise ValueError(f"vector field must be (V, {m}), got {Vv.shape}")
    out = np.zeros((n_vert, m))
    for i in range(m):
        for j in range(m):
            out[:, i] += paraproduct(A[:, i, j], Vv[:, j], cfg).values
    return out


def ambient_gradient(f, mesh):
    """Per-vertex ambient components of the tangential gradient of f.

    Whitney gradients per face, pushed to embedding coordinates through the
    face frames and averaged to vertices with dual-area weights.
    """
    fv = _as_values(f)
    grads = _corner_gradients(mesh)                       # (F, 3, 2)
    gface = np.einsum("fki,fk->fi", grads, fv[mesh.faces])
    gamb = np.einsum("fim,fi->fm", mesh.frames, gface)    # (F, m)
    V = mesh.n_vertices
    out = np.zeros((V, mesh.ambient_dim))
    w = (mesh.face_areas / 3.0)
    for k in range(3):
        np.add.at(out, mesh.faces[:, k], gamb * w[:, None])
    return out / mesh.vertex_areas[:, None]


def sample_at(mesh, vertex_values, faces, barys):
    """Barycentric interpolation of vertex data at interior points."""
    vals = np.asarray(vertex_values, dtype=np.float64)
    corners = mesh.faces[faces]
    if vals.ndim == 1:
        return np.einsum("pk,pk->p", vals[corners], barys)
    return np.einsum("pkm,pk->pm", vals[corners], barys)


def paracomposition(f, flow_map, cfg):
    """Pullback of f along a flow map minus its embedding paraproducts.

    K_phi f = f(phi(x)) - sum_j paraproduct((D_j f)(phi(x)), phi^j(x)) where
    phi^j are the embedding coordinates of the mapped points and D_j f the
    ambient components of the tangential gradient.  The subtraction removes
    exactly the low-high couplings that a raw composition picks up from the
    roughness of the map.
    """
    mesh = cfg.basis.mesh
    if flow_map.mesh is not mesh:
        raise ValueError("flow map and basis live on different meshes")
    fv = _as_values(f)
    pulled = sample_at(mesh, fv, flow_map.faces, flow_map.barys)
    images = flow_map.ambient_images()                    # (V, m)
    grads = ambient_gradient(fv, mesh)                    # (V, m)
    moved_grads = sample_at(mesh, grads, flow_map.faces, flow_map.barys)
    out = pulled.copy()
    for j in range(mesh.ambient_dim):
        out -= paraproduct(moved_grads[:, j], images[:, j], cfg).values
    return Cochain0(mesh, out)


# -- regularity measurement ----------------------------------------------------


@dataclass
class SlopeFit:
    """Sobolev regularity estimate from eigencoefficient decay.

    ``slope`` is the estimated exponent s (coefficients of an H^s field with
    equidistributed band energy decay like lambda^{-(s+1)/2}); ``residual``
    is the rms deviation of the fitted points in log10 units.
    """

    slope: float
    raw_slope: float
    intercept: float
    residual: float
    n_points: int
    lambdas: np.ndarray
    amplitudes: np.ndarray
    degenerate: bool = False


def sobolev_slope(f, basis, fit_range=None, binning="octave", mask_rel=1e-13):
    """Estimate Sobolev regularity from the decay of spectral coefficients.

    Fits log10 |coefficient| against log10 lambda over the nonzero modes
    (octave-binned rms amplitudes by default, per-mode with
    ``binning="none"``) and converts the decay rate to a smoothness exponent
    via s = -2 beta - 1.  ``fit_range`` restricts to a (lambda_lo,
    lambda_hi) window — fields whose spectrum peaks mid-band (remainders,
    band-limited data) need a tail window, since a global line through a
    bump measures nothing.  Modes below ``mask_rel`` times the peak
    amplitude are dropped as numerically empty.  Raises if fewer than 20
    usable modes remain; flags the fit degenerate when the frequency span is
    under a decade.
    """
    coeff = basis.analyze(_as_values(f))
    lam = basis.eigenvalues
    amp = np.abs(coeff[1:])
    lam = lam[1:]
    keep = amp > mask_rel * (amp.max() + 1e-300)
    if fit_range is not None:
        lo, hi = fit_range
        keep &= (lam >= lo) & (lam <= hi)
    amp = amp[keep]
    lam = lam[keep]
    if len(lam) < 20:
        raise ValueError(f"only {len(lam)} usable modes; need at least 20")

    if binning == "octave":
        edges = 2.0 ** np.arange(np.floor(np.log2(lam.min())),
                                 np.ceil(np.log2(lam.max())) + 1)
        which = np.digitize(lam, edges)
        xs, ys = [], []
        for b in np.unique(which):
            sel = which == b
            if sel.sum() == 0:
                continue
            xs.append(np.log10(lam[sel]).mean())
            ys.append(0.5 * np.log10((amp[sel] ** 2).mean()))
        xs = np.array(xs)
        ys = np.array(ys)
    elif binning == "none":
        xs = np.log10(lam)
        ys = np.log10(amp)
    else:
        raise ValueError(f"unknown binning {binning!r}")

    if len(xs) < 3:
        raise ValueError("too few frequency bands for a slope fit")
    design = np.stack([xs, np.ones_like(xs)], axis=1)
    (beta, intercept), *_ = np.linalg.lstsq(design, ys, rcond=None)
    resid = float(np.sqrt(np.mean((design @ [beta, intercept] - ys) ** 2)))
    degenerate = (xs.max() - xs.min()) < 1.0
    return SlopeFit(slope=float(-2.0 * beta - 1.0), raw_slope=float(beta),
                    intercept=float(intercept), residual=resid,
                    n_points=len(xs), lambdas=10.0 ** xs,
                    amplitudes=10.0 ** ys, degenerate=degenerate)


def synthesize_sobolev(basis, s, rng, amplitude=1.0):
    """Random field with equidistributed H^s band energy (coefficients
    lambda^{-(s+1)/2} with random signs, zero mean)."""
    lam = basis.eigenvalues
    coeff = np.zeros(len(lam))
    coeff[1:] = lam[1:] ** (-(s + 1.0) / 2.0)
    coeff[1:] *= rng.choice([-1.0, 1.0], size=len(lam) - 1)
    coeff[1:] *= amplitude / np.sqrt((coeff[1:] ** 2).sum())
    return Cochain0(basis.mesh, basis.synthesize(coeff))
