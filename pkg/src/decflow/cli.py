"""Command-line front end: mesh generation, experiment drivers, reports.

Five subcommands share one config format (see config.py):

* ``run``    -- vorticity transport; diagnostics CSV + VTK snapshots.
* ``exp``    -- time-1 flow map of a velocity; map CSV + area-error report.
* ``probe``  -- differential spectrum, ellipticity certificate, band report.
* ``verify`` -- the discrete-identity suite; PASS/FAIL report, exit code.
* ``slopes`` -- paracalculus smoothing ledger.

Every writer in export.py is deterministic, so identical config + seed give
byte-identical files.
"""

from __future__ import annotations

import argparse
import os
import re
import sys

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .dec import (Cochain0, Cochain1, codifferential, exterior_derivative,
                  norm_l2)
from .export import (Certificate, ensure_dir, write_csv, write_diagnostics_csv,
                     write_histogram_csv, write_spectrum_csv, write_vtk)
from .flow import (FlowMap, exp_map, invert_flow_map, locate_points,
                   pushforward_area_error, run_euler)
from .hodge import (CohomologyClass, biot_savart, curl, divergence,
                    harmonic_basis, poisson_solver)
from .meshgen import flat_torus, icosphere
from .meshio import load_mesh
from .para import (ParaproductConfig, bony_remainder, paracomposition,
                   paraproduct, sobolev_slope, synthesize_sobolev)
from .probe import (apply_B_tilde, dexp_jacobian, ellipticity_certificate,
                    embed_flow, face_tangent_maps, symbol_biot_savart)
from .spectral import compute_spectral_basis

_MESH_RE = re.compile(r"^(flat_torus|icosphere)\((\d+)\)$")
_FIELD_RE = re.compile(r"^(sobolev|shear|rotation)\(([-+0-9.eE]+)\)$")


def generate_mesh(kind):
    """Build a mesh from a generator spec or load one from a file path.

    ``flat_torus(n)`` needs n a power of two (4..1024); ``icosphere(level)``
    caps the subdivision level at 7.  Anything else is treated as a path.
    """
    m = _MESH_RE.match(kind.strip())
    if m is None:
        if os.path.exists(kind):
            return load_mesh(kind)
        raise ValueError(f"mesh spec {kind!r} is neither a generator "
                         "nor an existing file")
    name, arg = m.group(1), int(m.group(2))
    if name == "flat_torus":
        if arg < 4 or arg > 1024 or arg & (arg - 1):
            raise ValueError(f"flat_torus size {arg} must be a power of two "
                             "in [4, 1024]")
        return flat_torus(arg)
    if arg > 7:
        raise ValueError(f"icosphere level {arg} exceeds the cap of 7")
    return icosphere(arg)


def initial_vorticity(cfg, mesh, rng, basis=None):
    """Construct the configured initial vorticity on the mesh."""
    spec = cfg.field.strip()
    if spec == "zero":
        return Cochain0(mesh, np.zeros(mesh.n_vertices))
    m = _FIELD_RE.match(spec)
    if m is None:
        raise ValueError(f"field spec {spec!r}: expected zero, sobolev(s), "
                         "shear(a), or rotation(w)")
    name, arg = m.group(1), float(m.group(2))
    if name == "sobolev":
        if basis is None:
            basis = compute_spectral_basis(mesh, cfg.modes)
        return synthesize_sobolev(basis, arg, rng)
    if name == "shear":
        if mesh.plane_coords is None:
            raise ValueError("shear initial data needs a flat-torus mesh")
        y = mesh.plane_coords[:, 1]
        return Cochain0(mesh, -2.0 * np.pi * arg * np.cos(2.0 * np.pi * y))
    if mesh.ambient_dim != 3:
        raise ValueError("rotation initial data needs an embedded mesh")
    w = 2.0 * arg * mesh.vertices[:, 2]
    w -= (mesh.vertex_areas @ w) / mesh.total_area
    return Cochain0(mesh, w)


def _cohomology(cfg, mesh):
    if not cfg.harmonic_class:
        return CohomologyClass.zero(mesh)
    coeffs = np.asarray(cfg.harmonic_class, dtype=np.float64)
    if coeffs.size != 2 * mesh.genus:
        raise ValueError(f"class needs {2 * mesh.genus} coefficients for a "
                         f"genus-{mesh.genus} mesh, got {coeffs.size}")
    return CohomologyClass(coeffs)


def _mesh_banner(cfg, mesh):
    return ["mesh: %s  V=%d E=%d F=%d genus=%d" %
            (cfg.mesh, mesh.n_vertices, mesh.n_edges, mesh.n_faces, mesh.genus),
            "seed: %d" % cfg.seed]


# -- run -----------------------------------------------------------------------


def cmd_run(cfg):
    mesh = generate_mesh(cfg.mesh)
    rng = np.random.default_rng(cfg.seed)
    omega0 = initial_vorticity(cfg, mesh, rng)
    coh = _cohomology(cfg, mesh)
    out = ensure_dir(cfg.out)

    if cfg.T == 0:
        traj = run_euler(omega0, coh, 0.0, cfg.dt)
    else:
        n_steps = int(round(cfg.T / cfg.dt))
        stride = max(1, n_steps // 8)
        traj = run_euler(omega0, coh, cfg.T, cfg.dt, snapshot_stride=stride)

    write_diagnostics_csv(os.path.join(out, "diagnostics.csv"),
                          traj.diagnostics)
    for state in traj.states:
        step = int(round(state.t / cfg.dt)) if cfg.dt else 0
        write_vtk(os.path.join(out, "snapshot_%05d.vtk" % step), state)

    d0, d1 = traj.diagnostics[0], traj.diagnostics[-1]
    drift = abs(d1.energy - d0.energy) / max(abs(d0.energy), 1e-300)
    print(f"run: {len(traj.diagnostics) - 1} steps to t={d1.t:g}, "
          f"{len(traj.states)} snapshots, energy drift {drift:.3e}")
    print(f"run: reports in {out}")
    return 0


# -- exp -----------------------------------------------------------------------


def cmd_exp(cfg):
    mesh = generate_mesh(cfg.mesh)
    rng = np.random.default_rng(cfg.seed)
    omega0 = initial_vorticity(cfg, mesh, rng)
    v = biot_savart(omega0, _cohomology(cfg, mesh))
    out = ensure_dir(cfg.out)

    phi = exp_map(v)
    if mesh.plane_coords is not None:
        src, img = mesh.plane_coords, phi.plane_images()
        cols = ["vertex", "x", "y", "image_x", "image_y"]
    else:
        src, img = mesh.vertices, phi.ambient_images()
        cols = ["vertex"] + ["xyz"[i] for i in range(src.shape[1])] \
            + ["image_" + "xyz"[i] for i in range(src.shape[1])]
    rows = [[k, *src[k], *img[k]] for k in range(mesh.n_vertices)]
    write_csv(os.path.join(out, "flow_map.csv"), cols, rows)

    cert = Certificate("exponential-map report", _mesh_banner(cfg, mesh))
    dphi = face_tangent_maps(phi)
    det = dphi[:, 0, 0] * dphi[:, 1, 1] - dphi[:, 0, 1] * dphi[:, 1, 0]
    cert.check("image triangulation fold-free", det.min() > 0.0,
               "min det = %.3e" % det.min())
    cert.info("max |area ratio - 1|", "%.3e" % pushforward_area_error(phi))
    cert.info("max speed of v", "%.6g" % v.max_speed())
    if v.max_speed() == 0.0:
        cert.check("Exp(0) is the identity map", phi.is_identity(), "exact")
    ok = cert.write(os.path.join(out, "exp_certificate.txt"))
    sys.stdout.write(cert.render())
    return 0 if ok else 1


# -- probe ---------------------------------------------------------------------


def _band_ratios(mesh, basis, background, cfg):
    """Relative output/input energies of band-concentrated vorticities."""
    pcfg = ParaproductConfig(basis, n_vanishing=cfg.vanishing,
                             n_quad=cfg.quadrature)
    lo = max(2, cfg.modes // 32)
    bands = [(lo, 2 * lo), (4 * lo, 8 * lo), (16 * lo, 32 * lo)]
    bands = [(a, min(b, basis.size)) for a, b in bands if a < basis.size - 1]
    ratios = []
    for a, b in bands:
        coeffs = np.zeros(basis.size)
        coeffs[a:b] = 1.0
        bump = Cochain0(mesh, basis.synthesize(coeffs))
        image = apply_B_tilde(bump, background, pcfg)
        ratios.append((a, b, norm_l2(image) / norm_l2(bump)))
    return ratios


def cmd_probe(cfg):
    mesh = generate_mesh(cfg.mesh)
    rng = np.random.default_rng(cfg.seed)
    basis = compute_spectral_basis(mesh, cfg.modes + 1)
    omega0 = initial_vorticity(cfg, mesh, rng, basis=basis)
    v = biot_savart(omega0, _cohomology(cfg, mesh))
    out = ensure_dir(cfg.out)

    spectrum = dexp_jacobian(v, basis, n_modes=cfg.modes,
                             epsilon=cfg.epsilon, tau_rank=cfg.rank_tol,
                             workers=4)
    write_spectrum_csv(os.path.join(out, "spectrum.csv"),
                       spectrum.singular_values)

    phi = exp_map(v)
    ell = ellipticity_certificate(phi)
    write_histogram_csv(os.path.join(out, "symbol_histogram.csv"),
                        ell.histogram_edges, ell.histogram_counts)

    psi = invert_flow_map(phi)
    ratios = _band_ratios(mesh, basis, embed_flow(phi, psi), cfg)

    cert = Certificate("microglobal probe report", _mesh_banner(cfg, mesh))
    cert.info("differential spectrum",
              "%d values in [%.6g, %.6g]" % (cfg.modes,
                                             spectrum.min_singular,
                                             spectrum.singular_values[0]))
    for tau, rank in spectrum.ranks.items():
        cert.info("rank at threshold %g" % tau,
                  "%d   kernel %d = cokernel %d"
                  % (rank, spectrum.kernel_dims[tau],
                     spectrum.cokernel_dims[tau]))
    cert.check("no conjugate-point dip", not spectrum.conjugate_candidate,
               "min singular value %.6g" % spectrum.min_singular)
    cert.check("conjugated symbol positive", ell.passed,
               "sampled min %.6g, exact min %.6g"
               % (ell.min_value, ell.exact_min))
    for a, b, r in ratios:
        cert.info("band [%d, %d) energy ratio" % (a, b), "%.6g" % r)
    rr = [r for _, _, r in ratios]
    cert.check("band ratios within factor 3", max(rr) <= 3.0 * min(rr),
               "spread %.3f" % (max(rr) / min(rr)))
    ok = cert.write(os.path.join(out, "probe_certificate.txt"))
    sys.stdout.write(cert.render())
    return 0 if ok else 1


# -- verify --------------------------------------------------------------------


def _smooth_corpus(mesh, rng, count):
    """Mean-free Poisson-smoothed noise fields (cheap stand-in corpus)."""
    solver = poisson_solver(mesh)
    fields = []
    for _ in range(count):
        noise = rng.standard_normal(mesh.n_vertices) * mesh.vertex_areas
        noise -= noise.sum() / mesh.total_area * mesh.vertex_areas
        f = solver.solve(noise)
        f = f / max(np.abs(f).max(), 1e-300)
        fields.append(Cochain0(mesh, f))
    return fields


def cmd_verify(cfg):
    mesh = generate_mesh(cfg.mesh)
    rng = np.random.default_rng(cfg.seed)
    out = ensure_dir(cfg.out)
    cert = Certificate("discrete-identity verification",
                       _mesh_banner(cfg, mesh))

    dd = mesh.d1 @ mesh.d0
    dd_max = float(np.abs(dd.data).max()) if dd.nnz else 0.0
    cert.check("d after d vanishes", dd_max == 0.0, "max entry %g" % dd_max)

    worst = 0.0
    for _ in range(5):
        a = Cochain0(mesh, rng.standard_normal(mesh.n_vertices))
        b = Cochain1(mesh, rng.standard_normal(mesh.n_edges))
        lhs = float((mesh.edge_stars * exterior_derivative(a).values) @ b.values)
        rhs = float((mesh.vertex_areas * a.values) @ codifferential(b).values)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
    cert.check("star-adjointness of d and delta", worst <= 1e-12,
               "relative residual %.3e (tol 1e-12)" % worst)

    corpus = _smooth_corpus(mesh, rng, 20)
    div_worst = curl_worst = 0.0
    for f in corpus:
        vel = biot_savart(f)
        div_res = np.abs(divergence(vel.oneform).values).max()
        div_worst = max(div_worst, div_res / max(np.abs(f.values).max(), 1e-300))
        back = curl(vel.oneform)
        curl_worst = max(curl_worst,
                         norm_l2(Cochain0(mesh, back.values - f.values))
                         / norm_l2(f))
    cert.check("divergence of the vorticity solve", div_worst <= 1e-10,
               "relative max %.3e over 20 fields (tol 1e-10)" % div_worst)
    cert.check("curl inverts the vorticity solve", curl_worst <= 1e-8,
               "relative L2 %.3e over 20 fields (tol 1e-8)" % curl_worst)

    hb = harmonic_basis(mesh)
    cert.check("harmonic dimension is 2*genus", hb.dim == 2 * mesh.genus,
               "dim %d, genus %d" % (hb.dim, mesh.genus))
    h_worst = 0.0
    for h in hb.cochains():
        h_worst = max(h_worst, norm_l2(exterior_derivative(h)),
                      norm_l2(codifferential(h)))
    cert.check("harmonic fields are closed and coclosed", h_worst <= 1e-9,
               "max |dh|, |d*h| = %.3e (tol 1e-9)" % h_worst)

    theta = rng.uniform(0.0, 2.0 * np.pi, size=10000)
    radius = np.exp(rng.uniform(np.log(0.5), np.log(64.0), size=10000))
    xi = radius[:, None] * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    sig = symbol_biot_savart(xi)
    ortho = np.abs((sig * xi).sum(1)).max()
    mag = np.abs(np.linalg.norm(sig, axis=1)
                 - 1.0 / (2.0 * np.pi * radius)).max() * 2.0 * np.pi
    cert.check("vorticity-solve symbol orthogonal to xi", ortho <= 1e-12,
               "max |<sigma, xi>| = %.3e (tol 1e-12)" % ortho)
    cert.check("vorticity-solve symbol magnitude", mag <= 1e-12,
               "max scaled deviation %.3e (tol 1e-12)" % mag)

    from .probe import symbol_main
    eye = np.broadcast_to(np.eye(2), (10000, 2, 2))
    vals = symbol_main(xi / radius[:, None], eye)
    main_dev = np.abs(vals - 1.0).max()
    counts, edges = np.histogram(vals, bins=32, range=(0.0, 2.0))
    write_histogram_csv(os.path.join(out, "symbol_histogram.csv"),
                        edges, counts)
    cert.check("main symbol is 1 at the identity", main_dev <= 1e-12,
               "max |sigma - 1| = %.3e (tol 1e-12)" % main_dev)

    zero_v = biot_savart(Cochain0(mesh, np.zeros(mesh.n_vertices)))
    cert.check("Exp(0) is the identity map",
               exp_map(zero_v).is_identity(), "exact")

    basis = compute_spectral_basis(mesh, cfg.modes)
    pcfg = ParaproductConfig(basis, n_vanishing=cfg.vanishing,
                             n_quad=cfg.quadrature)
    f = synthesize_sobolev(basis, 2.5, rng)
    ones = np.ones(mesh.n_vertices)
    proj = paraproduct(ones, f.values, pcfg)
    p_res = norm_l2(Cochain0(mesh, proj.values - f.values)) / norm_l2(f)
    cert.check("paraproduct by 1 is the mean-free part", p_res <= 1e-8,
               "relative L2 %.3e (tol 1e-8)" % p_res)

    ok = cert.write(os.path.join(out, "verify_report.txt"))
    sys.stdout.write(cert.render())
    return 0 if ok else 1


# -- slopes --------------------------------------------------------------------


def rough_displacement_map(mesh, basis, rng, amplitude=3.0, smoothness=2.2):
    """A flow map displacing vertices by a synthetic rough field.

    The displacement components are independent draws from the synthetic
    Sobolev family, scaled so the largest excursion is ``amplitude`` mean
    edge lengths.  Returns the map and the scalar whose decay slope is the
    map's regularity.
    """
    m = 2 if mesh.plane_coords is not None else mesh.ambient_dim
    parts = [synthesize_sobolev(basis, smoothness, rng) for _ in range(m)]
    disp = np.stack([p.values for p in parts], axis=1)
    amp = amplitude * mesh.edge_lengths.mean() / np.abs(disp).max()
    if mesh.plane_coords is not None:
        pts = mesh.plane_coords + amp * disp
        faces, barys = locate_points(mesh, pts - np.floor(pts), plane=True)
    else:
        faces, barys = locate_points(mesh, mesh.vertices + amp * disp)
    return FlowMap(mesh, faces, barys, t=0.0), parts[0]


def cmd_slopes(cfg):
    mesh = generate_mesh(cfg.mesh)
    rng = np.random.default_rng(cfg.seed)
    basis = compute_spectral_basis(mesh, cfg.modes)
    pcfg = ParaproductConfig(basis, n_vanishing=cfg.vanishing,
                             n_quad=cfg.quadrature)
    out = ensure_dir(cfg.out)
    lam = basis.eigenvalues
    window = (lam[max(1, cfg.modes // 16)], lam[(7 * cfg.modes) // 8])

    def fit(field):
        return sobolev_slope(field, basis, fit_range=window)

    h = synthesize_sobolev(basis, 2.5, rng)
    f = synthesize_sobolev(basis, 2.5, rng)
    coeffs = np.zeros(basis.size)
    coeffs[1:6] = [1.0, -0.7, 0.4, 0.9, -0.3]
    f_smooth = Cochain0(mesh, basis.synthesize(coeffs))
    phi, carrier = rough_displacement_map(mesh, basis, rng)

    fits = {
        "input_h": fit(h),
        "input_f": fit(f),
        "map_displacement": fit(carrier),
        "remainder": fit(bony_remainder(f, h, pcfg)),
        "control_paraproduct": fit(paraproduct(h, f, pcfg)),
        "paracomposition": fit(paracomposition(f_smooth, phi, pcfg)),
        "control_rough_input": fit(paracomposition(f, phi, pcfg)),
    }

    write_csv(os.path.join(out, "slopes_ledger.csv"),
              ["quantity", "slope", "intercept", "residual", "n_points"],
              [[name, ft.slope, ft.intercept, ft.residual, ft.n_points]
               for name, ft in fits.items()])

    cert = Certificate("paracalculus smoothing ledger",
                       _mesh_banner(cfg, mesh))
    for name, ft in fits.items():
        cert.info("slope of %s" % name,
                  "%+.3f   residual %.3f" % (ft.slope, ft.residual))
    base = max(fits["input_h"].slope, fits["input_f"].slope) + 0.4
    rest_gap = fits["remainder"].slope - base
    cert.check("remainder gains at least 0.4", rest_gap >= 0.0,
               "slope %+.3f vs inputs + 0.4 = %+.3f"
               % (fits["remainder"].slope, base))
    cert.check("control: plain paraproduct stays rough",
               fits["control_paraproduct"].slope < base,
               "slope %+.3f" % fits["control_paraproduct"].slope)
    k_need = fits["map_displacement"].slope + 0.4
    cert.check("paracomposition beats the map by 0.4",
               fits["paracomposition"].slope >= k_need,
               "slope %+.3f vs map + 0.4 = %+.3f"
               % (fits["paracomposition"].slope, k_need))
    cert.check("control: rough input is not smoothed",
               fits["control_rough_input"].slope < k_need,
               "slope %+.3f" % fits["control_rough_input"].slope)
    res_worst = max(fits["remainder"].residual,
                    fits["paracomposition"].residual)
    cert.check("fit residuals at most 0.2", res_worst <= 0.2,
               "worst %.3f" % res_worst)
    ok = cert.write(os.path.join(out, "slopes_certificate.txt"))
    sys.stdout.write(cert.render())
    return 0 if ok else 1


# -- entry point ----------------------------------------------------------------


_COMMANDS = {
    "run": cmd_run,
    "exp": cmd_exp,
    "probe": cmd_probe,
    "verify": cmd_verify,
    "slopes": cmd_slopes,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="decflow",
        description="Discrete vorticity transport and paradifferential probes")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", metavar="PATH",
                       help="key=value config file")
        p.add_argument("--out", metavar="DIR",
                       help="output directory (overrides config)")
        p.add_argument("--seed", type=int, metavar="INT",
                       help="RNG seed (overrides config)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            cfg = load_config(args.config)
            if args.seed is not None:
                cfg = cfg.replace(seed=args.seed)
        elif args.seed is not None:
            cfg = RunConfig(seed=args.seed)
        else:
            print("error: need --config or --seed", file=sys.stderr)
            return 2
        if args.out is not None:
            cfg = cfg.replace(out=args.out)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 -- name the failing operation
        print(f"{args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
