"""
Eigenvector misalignment between two orthonormal bases.
"""
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from errors import InvalidInputError


@dataclass(frozen=True, eq=False)
class MisalignmentReport:
    """Cross-inner-product matrix C[i, j] = <v_i, u_j> and its summary."""
    epsilon: float
    cross_matrix: np.ndarray
    diag_min: float
    pairing: Optional[np.ndarray] = None


def misalignment(v: np.ndarray, u: np.ndarray, match: bool = False) -> MisalignmentReport:
    """
    epsilon = max_{i != j} |<v_i, u_j>|.

    With match=True the columns of U are first re-paired with those of V by
    a maximum-weight assignment on |V^T U| and sign-aligned, which removes
    arbitrary ordering of the second basis.
    """
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    if v.shape != u.shape or v.ndim != 2:
        raise InvalidInputError(f"Bases must have equal 2-d shapes, got {v.shape} and {u.shape}")

    cross = v.T @ u
    pairing = None
    if match:
        _, pairing = linear_sum_assignment(-np.abs(cross))
        cross = cross[:, pairing]
        signs = np.sign(np.diag(cross))
        signs[signs == 0] = 1.0
        cross = cross * signs

    n = cross.shape[0]
    if n <= 1:
        epsilon = 0.0
    else:
        off_diagonal = np.abs(cross[~np.eye(n, dtype=bool)])
        epsilon = float(off_diagonal.max())
    diag_min = float(np.min(np.abs(np.diag(cross)))) if n else 0.0
    return MisalignmentReport(epsilon=epsilon, cross_matrix=cross, diag_min=diag_min, pairing=pairing)


def rotate_basis(v: np.ndarray, theta: float, planes: Optional[Iterable[tuple[int, int]]] = None) -> np.ndarray:
    """
    Givens-rotate pairs of columns of V by theta.

    Rotating the single plane (0, 1) yields a basis whose misalignment with
    V is |sin(theta)|.
    """
    v = np.asarray(v, dtype=float)
    rotated = v.copy()
    planes = [(0, 1)] if planes is None else list(planes)
    cos, sin = np.cos(theta), np.sin(theta)
    for a, b in planes:
        if a == b or not (0 <= a < v.shape[1] and 0 <= b < v.shape[1]):
            raise InvalidInputError(f"Invalid rotation plane ({a}, {b}) for {v.shape[1]} columns")
        col_a, col_b = rotated[:, a].copy(), rotated[:, b].copy()
        rotated[:, a] = cos * col_a + sin * col_b
        rotated[:, b] = -sin * col_a + cos * col_b
    return rotated


def disjoint_planes(n: int, count: int, offset: int = 0) -> list[tuple[int, int]]:
    """count disjoint column pairs starting at column 2 * offset."""
    planes = []
    for index in range(offset, offset + count):
        a, b = 2 * index, 2 * index + 1
        if b >= n:
            break
        planes.append((a, b))
    return planes
