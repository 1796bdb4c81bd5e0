"""Spectral graph filters: functional calculus, Cayley expansions and stability checks."""

__version__ = "0.1.0"

from .errors import GraphFilterError, InputError, NumericalError
from .filters import (
    FilterSpec,
    apply_exact,
    apply_spatial,
    cayley_fourier,
    cayley_project,
    cayley_seminorm,
    filter_matrix,
    pad_response,
    response_of,
)
from .graph import Graph, Permutation, Perturbation, ShiftOperator, build_shift, gen_geometric_graph, perturb
from .linalg import eig_symmetric, spectral_norm
from .stability import (
    SweepConfig,
    certified_seminorm,
    per_index_instability_demo,
    stability_sweep,
    theorem1_bound,
)

__all__ = [
    "FilterSpec",
    "Graph",
    "GraphFilterError",
    "InputError",
    "NumericalError",
    "Permutation",
    "Perturbation",
    "ShiftOperator",
    "SweepConfig",
    "apply_exact",
    "apply_spatial",
    "build_shift",
    "cayley_fourier",
    "cayley_project",
    "cayley_seminorm",
    "certified_seminorm",
    "eig_symmetric",
    "filter_matrix",
    "gen_geometric_graph",
    "pad_response",
    "per_index_instability_demo",
    "perturb",
    "response_of",
    "spectral_norm",
    "stability_sweep",
    "theorem1_bound",
]
