"""
EdgeNet graph neural networks: configuration, parameterizations, forward and
backward passes, and Adam training.
"""
from .schemas import EdgeNetConfig, EpochMetrics, TrainingConfig
from .nonlinearities import Nonlinearity, get_nonlinearity, list_nonlinearities, register_nonlinearity
from .parameterizations import (
    GraphContext,
    LayerParameterization,
    get_parameterization,
    list_parameterizations,
    register_parameterization,
)
from .network import EdgeNet, count_parameters, perturbed_inference
from .optim import Adam
from .training import (
    TrainingResult,
    accuracy,
    evaluate,
    mean_squared_error,
    rmse,
    softmax_cross_entropy,
    train,
)

__all__ = [
    "EdgeNetConfig",
    "EpochMetrics",
    "TrainingConfig",
    "Nonlinearity",
    "get_nonlinearity",
    "list_nonlinearities",
    "register_nonlinearity",
    "GraphContext",
    "LayerParameterization",
    "get_parameterization",
    "list_parameterizations",
    "register_parameterization",
    "EdgeNet",
    "count_parameters",
    "perturbed_inference",
    "Adam",
    "TrainingResult",
    "accuracy",
    "evaluate",
    "mean_squared_error",
    "rmse",
    "softmax_cross_entropy",
    "train",
]
