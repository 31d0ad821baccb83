"""
Graph shift operators, spectra and generators.
"""
from .operator import (
    GraphShiftOperator,
    GraphSignal,
    SignalLike,
    SupportMask,
    eigendecompose,
    gft,
    igft,
    normalize_signs,
    signal_values,
    support_mask,
    with_spectrum,
)
from .generators import (
    CompleteGenerator,
    ErdosRenyiGenerator,
    GraphGenerator,
    PathGenerator,
    SBMGenerator,
    build_complete,
    build_erdos_renyi,
    build_path,
    build_sbm,
    default_retries,
    from_adjacency,
    get_generator,
    list_generators,
    permute,
    register_generator,
)

__all__ = [
    "GraphShiftOperator",
    "GraphSignal",
    "SignalLike",
    "SupportMask",
    "eigendecompose",
    "gft",
    "igft",
    "normalize_signs",
    "signal_values",
    "support_mask",
    "with_spectrum",
    "CompleteGenerator",
    "ErdosRenyiGenerator",
    "GraphGenerator",
    "PathGenerator",
    "SBMGenerator",
    "build_complete",
    "build_erdos_renyi",
    "build_path",
    "build_sbm",
    "default_retries",
    "from_adjacency",
    "get_generator",
    "list_generators",
    "permute",
    "register_generator",
]
