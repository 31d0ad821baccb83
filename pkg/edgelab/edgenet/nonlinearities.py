"""
Pointwise nonlinearities. Every registered function satisfies sigma(0) = 0
and |sigma(a) - sigma(b)| <= |a - b|.
"""
import os
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from errors import InvalidInputError


@dataclass(frozen=True)
class Nonlinearity:
    name: str
    forward: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]


def _relu(u: np.ndarray) -> np.ndarray:
    return np.maximum(u, 0.0)


def _relu_derivative(u: np.ndarray) -> np.ndarray:
    # subgradient 0 at the kink
    return (u > 0).astype(float)


def _abs_derivative(u: np.ndarray) -> np.ndarray:
    return np.sign(u)


def _identity(u: np.ndarray) -> np.ndarray:
    return np.array(u, dtype=float)


def _identity_derivative(u: np.ndarray) -> np.ndarray:
    return np.ones_like(u, dtype=float)


# Registry of available nonlinearities
_nonlinearities: dict[str, Nonlinearity] = {}


def register_nonlinearity(nonlinearity: Nonlinearity):
    """Register a nonlinearity under its name."""
    _nonlinearities[nonlinearity.name] = nonlinearity


def get_nonlinearity(name: Optional[str] = None) -> Nonlinearity:
    """
    Get a nonlinearity.
    If name is None, uses EDGELAB_NONLINEARITY env var or defaults to 'relu'.
    """
    if name is None:
        name = os.getenv("EDGELAB_NONLINEARITY", "relu")

    if name not in _nonlinearities:
        available = list(_nonlinearities.keys())
        raise InvalidInputError(f"Unknown nonlinearity '{name}'. Available: {available}")

    return _nonlinearities[name]


def list_nonlinearities() -> list[str]:
    return list(_nonlinearities.keys())


register_nonlinearity(Nonlinearity("relu", _relu, _relu_derivative))
register_nonlinearity(Nonlinearity("abs", np.abs, _abs_derivative))
register_nonlinearity(Nonlinearity("identity", _identity, _identity_derivative))
