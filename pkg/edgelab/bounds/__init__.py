"""
Stability constants, closed-form bounds and empirical trials.
"""
from .constants import (
    StabilityConstants,
    bound_edge,
    bound_es,
    bound_network,
    bound_si,
    edge_constant,
    es_constant,
    remainder_warning,
    si_constant,
)
from .trials import (
    FilterAnalysis,
    ScalingFit,
    SignTest,
    StabilityAnalysis,
    StabilityReport,
    analyze,
    analyze_filter,
    evaluate_trial,
    network_constants,
    ordering_sign_test,
    scaling_fit,
)

__all__ = [
    "StabilityConstants",
    "bound_edge",
    "bound_es",
    "bound_network",
    "bound_si",
    "edge_constant",
    "es_constant",
    "remainder_warning",
    "si_constant",
    "FilterAnalysis",
    "ScalingFit",
    "SignTest",
    "StabilityAnalysis",
    "StabilityReport",
    "analyze",
    "analyze_filter",
    "evaluate_trial",
    "network_constants",
    "ordering_sign_test",
    "scaling_fit",
]
