"""
Relative perturbation model for graph shift operators.
"""
from .sampling import (
    Perturbation,
    PerturbationMode,
    PerturbedGraph,
    perturb,
    sample_perturbation,
    spectral_norm,
)

__all__ = [
    "Perturbation",
    "PerturbationMode",
    "PerturbedGraph",
    "perturb",
    "sample_perturbation",
    "spectral_norm",
]
