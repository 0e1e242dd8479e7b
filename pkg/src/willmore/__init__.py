"""Area-constrained Willmore spheres concentrating at scalar curvature
critical points of a Riemannian 3-manifold.

The package solves the constrained Euler-Lagrange equation on small
geodesic spheres by spectral collocation, reduces the remaining
finite-dimensional problem over the center, and post-processes the
resulting families: curvature expansions, center drift, Morse index
against the scalar curvature Hessian, Hawking mass, and foliation
checks.
"""
from .ambient import (AffineChart, NormalChart, curvature_bundle, exp_map,
                      find_sc_critical, orthonormal_frame)
from .backend import backend_name, set_threads
from .config import RunConfig, build_provider, parse_config, print_config
from .errors import (ConfigError, DegenerateBasisError,
                     DegenerateLandscapeError, DomainError, IntegratorError,
                     NoConvergenceError, WillmoreError)
from .geometry import (coordinate_sphere_hawking, hawking_mass,
                       surface_geometry, willmore_energy)
from .landscape import (CriticalPoint, ExpansionTable, FoliationReport, Leaf,
                        expansion_table, find_critical_point,
                        foliate_sweep, foliation_diagnostics, hessian_index)
from .providers import make_provider, provider_names
from .reduction import (reduced_gradient, solve_correction, solve_tolerance,
                        multipliers)
from .spectral import SphereGrid, get_grid

__version__ = "0.1.0"

__all__ = [
    "AffineChart", "NormalChart", "curvature_bundle", "exp_map",
    "find_sc_critical", "orthonormal_frame",
    "backend_name", "set_threads",
    "RunConfig", "build_provider", "parse_config", "print_config",
    "ConfigError", "DegenerateBasisError", "DegenerateLandscapeError",
    "DomainError", "IntegratorError", "NoConvergenceError", "WillmoreError",
    "coordinate_sphere_hawking", "hawking_mass", "surface_geometry",
    "willmore_energy",
    "CriticalPoint", "ExpansionTable", "FoliationReport", "Leaf",
    "expansion_table", "find_critical_point", "foliate_sweep",
    "foliation_diagnostics", "hessian_index",
    "make_provider", "provider_names",
    "reduced_gradient", "solve_correction", "solve_tolerance", "multipliers",
    "SphereGrid", "get_grid",
    "__version__",
]
