"""
Constructors for each filter class.

Every constructor validates its inputs and returns an immutable
FilterParams; classes with a known eigenstructure carry it so the spectral
analysis never re-decomposes.
"""
from typing import Optional, Sequence

import numpy as np

from errors import InvalidInputError
from graphcore import GraphShiftOperator, SupportMask
from .base import EigenPair, FilterClass, FilterParams
from .si_basis import SIBasis

ORTHONORMAL_TOLERANCE = 1e-8


def _as_order_array(values, label: str, ndim: int) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if array.ndim != ndim or array.shape[0] < 1:
        raise InvalidInputError(f"{label} must be a {ndim}-d array with one row per order, got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{label} contains non-finite values")
    return array


def check_orthonormal(vectors: np.ndarray, tolerance: float = ORTHONORMAL_TOLERANCE):
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim != 2 or vectors.shape[0] != vectors.shape[1]:
        raise InvalidInputError(f"Eigenbasis must be square, got shape {vectors.shape}")
    error = np.max(np.abs(vectors.T @ vectors - np.eye(vectors.shape[0])))
    if error > tolerance:
        raise InvalidInputError(f"Eigenbasis is not orthonormal (max |U^T U - I| = {error:.3e})")


def spectral_matrix(vectors: np.ndarray, values: np.ndarray) -> np.ndarray:
    """U diag(values) U^T, symmetrized exactly."""
    matrix = (vectors * values) @ vectors.T
    return 0.5 * (matrix + matrix.T)


def make_convolutional(taps: Sequence[float], n: int) -> FilterParams:
    """Phi^(k) = h_k I."""
    taps = _as_order_array(taps, "taps", 1)
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    matrices = taps[:, None, None] * np.eye(n)[None, :, :]
    identity = [EigenPair(vectors=np.eye(n), values=np.full(n, h)) for h in taps]
    return FilterParams(matrices=matrices, class_tag=FilterClass.CONVOLUTIONAL,
                        coefficients=taps, eigenbases=identity)


def make_node_varying(diagonals: np.ndarray) -> FilterParams:
    """Phi^(k) = diag(d^(k))."""
    diagonals = _as_order_array(diagonals, "diagonals", 2)
    n = diagonals.shape[1]
    matrices = np.zeros((diagonals.shape[0], n, n))
    index = np.arange(n)
    matrices[:, index, index] = diagonals
    return FilterParams(matrices=matrices, class_tag=FilterClass.NODE_VARYING, coefficients=diagonals)


def make_si_params(basis: SIBasis, weights: np.ndarray) -> FilterParams:
    """
    Shift-invariant filter Phi^(k) = V diag(B alpha^(k)) V^T.

    Entries on forbidden pairs are set to exactly zero; their computed values
    are rounding noise because omega lies in the constraint null space.
    """
    weights = _as_order_array(weights, "weights", 2)
    if weights.shape[1] != basis.dimension:
        raise InvalidInputError(f"Expected {basis.dimension} weights per order, got {weights.shape[1]}")
    omegas = basis.eigenvalues_for(weights)
    vectors = basis.eigenvectors
    matrices = np.stack([basis.support.project(spectral_matrix(vectors, omega)) for omega in omegas])
    eigenbases = [EigenPair(vectors=vectors, values=omega) for omega in omegas]
    return FilterParams(matrices=matrices, class_tag=FilterClass.SHIFT_INVARIANT,
                        support=basis.support, coefficients=weights, eigenbases=eigenbases)


def make_spectral_si(operator: GraphShiftOperator, eigenvalues: np.ndarray) -> FilterParams:
    """
    Filter sharing the operator's eigenvectors, Phi^(k) = V diag(phi^(k)) V^T,
    without the support restriction. Commutes with S by construction.
    """
    eigenvalues = _as_order_array(eigenvalues, "eigenvalues", 2)
    if eigenvalues.shape[1] != operator.n:
        raise InvalidInputError(f"Expected {operator.n} eigenvalues per order, got {eigenvalues.shape[1]}")
    vectors = operator.eigenvectors
    matrices = np.stack([spectral_matrix(vectors, phi) for phi in eigenvalues])
    eigenbases = [EigenPair(vectors=vectors, values=phi) for phi in eigenvalues]
    return FilterParams(matrices=matrices, class_tag=FilterClass.SHIFT_INVARIANT, eigenbases=eigenbases)


def make_es_params(vectors: np.ndarray, eigenvalues: np.ndarray) -> FilterParams:
    """Eigenvector-sharing filter: one basis U for every order."""
    check_orthonormal(vectors)
    vectors = np.asarray(vectors, dtype=float)
    eigenvalues = _as_order_array(eigenvalues, "eigenvalues", 2)
    if eigenvalues.shape[1] != vectors.shape[0]:
        raise InvalidInputError(f"Expected {vectors.shape[0]} eigenvalues per order, got {eigenvalues.shape[1]}")
    matrices = np.stack([spectral_matrix(vectors, phi) for phi in eigenvalues])
    eigenbases = [EigenPair(vectors=vectors, values=phi) for phi in eigenvalues]
    return FilterParams(matrices=matrices, class_tag=FilterClass.EIGENVECTOR_SHARING, eigenbases=eigenbases)


def make_general(matrices: np.ndarray, support: Optional[SupportMask] = None) -> FilterParams:
    """General edge-varying filter, projected onto the support when given."""
    matrices = _as_order_array(matrices, "matrices", 3)
    if support is not None:
        if support.n != matrices.shape[1]:
            raise InvalidInputError(f"Support is for {support.n} nodes, matrices for {matrices.shape[1]}")
        matrices = support.project(matrices)
    return FilterParams(matrices=matrices, class_tag=FilterClass.GENERAL, support=support)


def make_edge_from_eigenbases(bases: Sequence[np.ndarray], eigenvalues: np.ndarray) -> FilterParams:
    """General symmetric filter with its own eigenbasis U^(k) per order."""
    eigenvalues = _as_order_array(eigenvalues, "eigenvalues", 2)
    if len(bases) != eigenvalues.shape[0]:
        raise InvalidInputError(f"Got {len(bases)} eigenbases for {eigenvalues.shape[0]} orders")
    pairs = []
    for vectors, phi in zip(bases, eigenvalues):
        check_orthonormal(vectors)
        pairs.append(EigenPair(vectors=np.asarray(vectors, dtype=float), values=phi))
    matrices = np.stack([spectral_matrix(pair.vectors, pair.values) for pair in pairs])
    return FilterParams(matrices=matrices, class_tag=FilterClass.GENERAL, eigenbases=pairs)


def scale(params: FilterParams, factor: float) -> FilterParams:
    """Multiply every Phi^(k) (and its eigenvalues) by a scalar."""
    eigenbases = None
    if params.eigenbases is not None:
        eigenbases = [EigenPair(vectors=pair.vectors, values=pair.values * factor) for pair in params.eigenbases]
    coefficients = None if params.coefficients is None else params.coefficients * factor
    return FilterParams(matrices=params.matrices * factor, class_tag=params.class_tag,
                        support=params.support, coefficients=coefficients, eigenbases=eigenbases)


def degrees_of_freedom(class_tag: "FilterClass | str", n: int, order: int,
                       support: Optional[SupportMask] = None, si_dimension: Optional[int] = None) -> int:
    """Free parameters of one filter of the given class."""
    class_tag = FilterClass.parse(class_tag)
    taps = order + 1
    if class_tag is FilterClass.CONVOLUTIONAL:
        return taps
    if class_tag is FilterClass.NODE_VARYING:
        return n * taps
    if class_tag is FilterClass.SHIFT_INVARIANT:
        if si_dimension is None:
            raise InvalidInputError("si_dimension is required for shift-invariant filters")
        return si_dimension * taps
    if class_tag is FilterClass.EIGENVECTOR_SHARING:
        return n * taps + n * (n - 1) // 2
    forbidden = 0 if support is None else len(support)
    return taps * (n * n - forbidden)
