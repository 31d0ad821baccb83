"""
Basis of the shift-invariant edge-varying filter subspace.

A matrix V diag(omega) V^T respects the graph support exactly when
sum_m V[i, m] V[j, m] omega_m = 0 for every forbidden pair (i, j). Stacking
those constraints gives a linear system whose null space holds every
admissible omega.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from graphcore import GraphShiftOperator, SupportMask

logger = logging.getLogger(__name__)

NULL_SPACE_RCOND = 1e-10


@dataclass(frozen=True, eq=False)
class SIBasis:
    """Orthonormal columns spanning the admissible eigenvalue vectors."""
    vectors: np.ndarray
    eigenvectors: np.ndarray
    support: SupportMask

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    def eigenvalues_for(self, weights: np.ndarray) -> np.ndarray:
        """omega = B alpha for one weight vector or a stack of them."""
        return np.asarray(weights, dtype=float) @ self.vectors.T

    def weights_for(self, omega: np.ndarray) -> np.ndarray:
        """Least-squares weights alpha = B^T omega."""
        return np.asarray(omega, dtype=float) @ self.vectors

    def residual(self, omega: np.ndarray) -> float:
        """Distance from omega to the admissible subspace."""
        omega = np.asarray(omega, dtype=float)
        return float(np.linalg.norm(omega - self.eigenvalues_for(self.weights_for(omega))))


def constraint_matrix(operator: GraphShiftOperator) -> np.ndarray:
    """One row V[i, :] * V[j, :] per forbidden pair with i < j."""
    rows, cols = operator.support.upper_indices
    vectors = operator.eigenvectors
    return vectors[rows, :] * vectors[cols, :]


def build_si_basis(operator: GraphShiftOperator) -> SIBasis:
    """
    Null space of the support constraints, from an SVD with relative cutoff
    1e-10 of the largest singular value.
    """
    system = constraint_matrix(operator)
    if system.shape[0] == 0:
        vectors = np.eye(operator.n)
    else:
        vectors = linalg.null_space(system, rcond=NULL_SPACE_RCOND)
    logger.debug(f"[si-basis] n={operator.n} constraints={system.shape[0]} dimension={vectors.shape[1]}")
    return SIBasis(vectors=vectors, eigenvectors=operator.eigenvectors, support=operator.support)
