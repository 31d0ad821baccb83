"""
Spectral analysis: frequency responses, misalignment, Lipschitz constants
and spectral-domain reconstructions.
"""
from .response import (
    FrequencyResponse,
    ResponseKind,
    certify,
    edge_response,
    es_response,
    filter_response,
    response_bound,
    si_response,
)
from .misalignment import MisalignmentReport, disjoint_planes, misalignment, rotate_basis
from .lipschitz import (
    derivative_form,
    lipschitz_constant_graph_specific,
    lipschitz_constant_multivariate,
    lipschitz_constant_univariate,
    lipschitz_gradient,
    pair_form,
    sample_frequency_pairs,
)
from .reconstruct import (
    MultivariateFrequency,
    graph_frequency_pairs,
    scaled_frequencies,
    spectral_apply_edge,
    spectral_apply_es,
    spectral_apply_scaled,
    spectral_apply_si,
)

__all__ = [
    "FrequencyResponse",
    "ResponseKind",
    "certify",
    "edge_response",
    "es_response",
    "filter_response",
    "response_bound",
    "si_response",
    "MisalignmentReport",
    "disjoint_planes",
    "misalignment",
    "rotate_basis",
    "derivative_form",
    "lipschitz_constant_graph_specific",
    "lipschitz_constant_multivariate",
    "lipschitz_constant_univariate",
    "lipschitz_gradient",
    "pair_form",
    "sample_frequency_pairs",
    "MultivariateFrequency",
    "graph_frequency_pairs",
    "scaled_frequencies",
    "spectral_apply_edge",
    "spectral_apply_es",
    "spectral_apply_scaled",
    "spectral_apply_si",
]
