"""Discrete vorticity transport on triangle meshes, with the paradifferential
probes needed to study the regularity of the associated flow maps."""

from .mesh import TriangleMesh
from .meshgen import flat_torus, genus2_block, icosahedron, icosphere
from .meshio import load_mesh, read_obj, read_off, write_obj
from .dec import (Cochain, Cochain0, Cochain1, Cochain2, TangentField,
                  codifferential, exterior_derivative, face_to_vertex, flat,
                  hodge_laplacian_1, hodge_star, inner, integrate,
                  laplace_beltrami, norm_l2, rotate_J, sharp, vertex_to_face)
from .spectral import SpectralBasis, compute_spectral_basis, spectral_multiplier
from .hodge import (CohomologyClass, DivFreeVelocity, HarmonicBasis,
                    PoissonSolver, biot_savart, curl, divergence,
                    harmonic_basis, hodge_decompose, poisson_solver)
from .fourier import (evaluate_band_limited, fourier_biot_savart_oracle,
                      grid_curl, grid_divergence)
from .flow import (CFLError, Diagnostics, EulerTrajectory, FlowMap, FlowState,
                   FoldOverError, advect_step, compose_maps, evaluate_map,
                   exp_map, invert_flow_map, locate_points,
                   pushforward_area_error, run_euler, trace_points)
from .para import (ParaproductConfig, SlopeFit, ambient_gradient,
                   bony_remainder, paracomposition, paraproduct, sample_at,
                   sobolev_slope, synthesize_sobolev, vector_paraproduct)
from .probe import (EllipticityCertificate, EmbeddedFlow, JacobianSpectrum,
                    VertexField, WQuantity, apply_B_tilde,
                    check_div_smoothness, compute_U, compute_W, dexp_jacobian,
                    ellipticity_certificate, embed_flow, face_tangent_maps,
                    symbol_biot_savart, symbol_main, symbol_main_pushforward)
from .config import ConfigError, RunConfig, load_config, parse_config
from .cli import generate_mesh

__all__ = [name for name in dir() if not name.startswith("_")]
