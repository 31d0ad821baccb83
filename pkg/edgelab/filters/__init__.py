"""
Edge-varying graph filters: parameter records, constructors and application.
"""
from .base import EigenPair, FilterClass, FilterParams
from .si_basis import SIBasis, build_si_basis, constraint_matrix
from .constructors import (
    check_orthonormal,
    degrees_of_freedom,
    make_convolutional,
    make_edge_from_eigenbases,
    make_es_params,
    make_general,
    make_node_varying,
    make_si_params,
    make_spectral_si,
    scale,
)
from .ops import apply, shifted_signals

__all__ = [
    "EigenPair",
    "FilterClass",
    "FilterParams",
    "SIBasis",
    "build_si_basis",
    "constraint_matrix",
    "check_orthonormal",
    "degrees_of_freedom",
    "make_convolutional",
    "make_edge_from_eigenbases",
    "make_es_params",
    "make_general",
    "make_node_varying",
    "make_si_params",
    "make_spectral_si",
    "scale",
    "apply",
    "shifted_signals",
]
