"""Magnetic Laplacians on Z^d-periodic graphs: finite-volume spectral density,
exact trace moments and algebraic lower bounds."""

__version__ = "0.1.0"

from .graph import GammaGraph, VertexId, build_cayley_zd, build_from_templates
from .magnetic import Phase, WeightFunction, landau_weight, template_weight, trivial_weight
from .exhaustion import boxes_zd, corner_boxes_zd, induce_subgraph
from .operators import BoundaryCondition, exact_moment, operator_bounds, restrict_dml, restrict_harper
from .spectral import counting_function, density_sequence, hermitian_eigenvalues

__all__ = [
    "BoundaryCondition",
    "GammaGraph",
    "Phase",
    "VertexId",
    "WeightFunction",
    "boxes_zd",
    "build_cayley_zd",
    "build_from_templates",
    "corner_boxes_zd",
    "counting_function",
    "density_sequence",
    "exact_moment",
    "hermitian_eigenvalues",
    "induce_subgraph",
    "landau_weight",
    "operator_bounds",
    "restrict_dml",
    "restrict_harper",
    "template_weight",
    "trivial_weight",
]
