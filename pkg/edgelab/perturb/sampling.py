"""
Relative perturbations of a graph shift operator.

A perturbation is a symmetric matrix E with ||E||_2 = size; the perturbed
operator is S + E S + S E.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from errors import InvalidInputError
from graphcore import GraphShiftOperator

logger = logging.getLogger(__name__)

POWER_TOLERANCE = 1e-14
POWER_MAX_ITERATIONS = 100_000


class PerturbationMode(str, Enum):
    DENSE_RANDOM = "dense-random"
    SUPPORT_RESPECTING = "support-respecting"
    TARGETED_SPECTRAL = "targeted-spectral"

    @classmethod
    def parse(cls, value: "str | PerturbationMode") -> "PerturbationMode":
        if isinstance(value, PerturbationMode):
            return value
        try:
            return cls(str(value).strip().lower().replace("_", "-"))
        except ValueError:
            available = [member.value for member in cls]
            raise InvalidInputError(f"Unknown perturbation mode '{value}'. Available: {available}")


@dataclass(frozen=True, eq=False)
class Perturbation:
    matrix: np.ndarray
    size: float
    mode: PerturbationMode
    seed: Optional[int] = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class PerturbedGraph:
    """Base and perturbed operators with the realized deviation ||S~ - S||_2."""
    base: GraphShiftOperator
    perturbation: Perturbation
    operator: GraphShiftOperator
    deviation_norm: float


def spectral_norm(matrix: np.ndarray, seed: int = 0, tolerance: float = POWER_TOLERANCE,
                  max_iterations: int = POWER_MAX_ITERATIONS) -> float:
    """
    Largest singular value by power iteration on M^T M.

    Iteration stops when the relative change of the estimate drops below
    tolerance.
    """
    matrix = np.asarray(matrix, dtype=float)
    if not np.any(matrix):
        return 0.0
    rng = np.random.default_rng(seed)
    vector = rng.standard_normal(matrix.shape[1])
    vector /= np.linalg.norm(vector)
    estimate = 0.0
    for iteration in range(max_iterations):
        image = matrix @ vector
        updated = float(np.linalg.norm(image))
        if updated == 0.0:
            vector = rng.standard_normal(matrix.shape[1])
            vector /= np.linalg.norm(vector)
            continue
        vector = matrix.T @ image
        vector /= np.linalg.norm(vector)
        if abs(updated - estimate) <= tolerance * updated:
            return updated
        estimate = updated
    logger.warning(f"[perturb] power iteration stopped after {max_iterations} iterations")
    return estimate


def _symmetric_gaussian(rng: np.random.Generator, n: int) -> np.ndarray:
    draw = rng.standard_normal((n, n))
    return (draw + draw.T) / 2


def sample_perturbation(
    n: int,
    size: float,
    mode: "str | PerturbationMode" = PerturbationMode.DENSE_RANDOM,
    seed: int = 0,
    operator: Optional[GraphShiftOperator] = None,
    eigen_index: int = -1,
) -> Perturbation:
    """
    Draw a symmetric E with ||E||_2 = size.

    Args:
        n: number of nodes
        size: target spectral norm, >= 0
        mode: dense-random, support-respecting (needs operator) or
              targeted-spectral (needs operator; E = size v v^T for the
              eigenvector at eigen_index)
        seed: RNG seed
        operator: graph the perturbation is meant for
    """
    mode = PerturbationMode.parse(mode)
    if size < 0 or not np.isfinite(size):
        raise InvalidInputError(f"Perturbation size must be a finite value >= 0, got {size}")
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    if mode is not PerturbationMode.DENSE_RANDOM:
        if operator is None:
            raise InvalidInputError(f"Mode '{mode.value}' needs the graph operator")
        if operator.n != n:
            raise InvalidInputError(f"Operator has {operator.n} nodes, expected {n}")

    if size == 0:
        return Perturbation(matrix=np.zeros((n, n)), size=0.0, mode=mode, seed=seed)

    rng = np.random.default_rng(seed)
    if mode is PerturbationMode.TARGETED_SPECTRAL:
        vector = operator.eigenvectors[:, eigen_index]
        matrix = size * np.outer(vector, vector)
        return Perturbation(matrix=matrix, size=float(size), mode=mode, seed=seed)

    matrix = _symmetric_gaussian(rng, n)
    if mode is PerturbationMode.SUPPORT_RESPECTING:
        edges = (operator.matrix != 0) & ~np.eye(n, dtype=bool)
        matrix = np.where(edges, matrix, 0.0)
    norm = spectral_norm(matrix, seed=seed)
    if norm == 0.0:
        raise InvalidInputError("Sampled perturbation is identically zero (graph has no edges)")
    matrix = matrix * (size / norm)
    return Perturbation(matrix=matrix, size=float(size), mode=mode, seed=seed)


def perturb(operator: GraphShiftOperator, perturbation: Perturbation) -> PerturbedGraph:
    """S~ = S + E S + S E with a fresh eigendecomposition (no renormalization)."""
    if perturbation.n != operator.n:
        raise InvalidInputError(f"Perturbation is {perturbation.n}x{perturbation.n}, graph has {operator.n} nodes")
    product = perturbation.matrix @ operator.matrix
    tilde = operator.matrix + product + product.T
    tilde = 0.5 * (tilde + tilde.T)
    perturbed = GraphShiftOperator.from_matrix(tilde, communities=operator.communities, name=operator.name)
    deviation = float(np.linalg.norm(tilde - operator.matrix, 2))
    return PerturbedGraph(base=operator, perturbation=perturbation, operator=perturbed, deviation_norm=deviation)
