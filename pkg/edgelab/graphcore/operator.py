"""
Graph shift operators, support masks and graph signals.

An operator is an immutable symmetric n x n matrix together with its
orthonormal eigendecomposition S = V diag(lam) V^T. Eigenvalues are sorted
ascending and every eigenvector column is sign-normalized so its
largest-magnitude entry is positive.
"""
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import linalg

from errors import InvalidInputError

SYMMETRY_TOLERANCE = 1e-12


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class SupportMask:
    """Index pairs (i, j), i != j, where every filter must be zero."""
    forbidden: np.ndarray

    @property
    def n(self) -> int:
        return self.forbidden.shape[0]

    @property
    def indices(self) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(self.forbidden)
        return list(zip(rows.tolist(), cols.tolist()))

    @property
    def upper_indices(self) -> tuple[np.ndarray, np.ndarray]:
        """Forbidden pairs with i < j, enough for symmetric constraints."""
        return np.nonzero(np.triu(self.forbidden, k=1))

    @property
    def allowed(self) -> np.ndarray:
        return ~self.forbidden

    def __len__(self) -> int:
        return int(self.forbidden.sum())

    def project(self, matrix: np.ndarray) -> np.ndarray:
        """Zero every forbidden entry of a matrix (or a stack of matrices)."""
        return np.where(self.forbidden, 0.0, matrix)


@dataclass(frozen=True, eq=False)
class GraphSignal:
    """A real vector indexed by nodes, optionally with its cached GFT."""
    values: np.ndarray
    spectrum: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.values.shape[-1]

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


SignalLike = Union[GraphSignal, np.ndarray, list]


def signal_values(x: SignalLike) -> np.ndarray:
    if isinstance(x, GraphSignal):
        return x.values
    return np.asarray(x, dtype=float)


def eigendecompose(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Symmetric eigendecomposition with the sign convention applied.

    Returns:
        (eigenvalues ascending, eigenvector columns)
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidInputError(f"Expected a square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise InvalidInputError("Matrix contains non-finite entries")
    asymmetry = np.max(np.abs(matrix - matrix.T)) if matrix.size else 0.0
    if asymmetry > SYMMETRY_TOLERANCE:
        raise InvalidInputError(f"Matrix is not symmetric (max |S - S^T| = {asymmetry:.3e})")

    eigenvalues, eigenvectors = linalg.eigh(matrix)
    return eigenvalues, normalize_signs(eigenvectors)


def normalize_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude entry of each is positive."""
    vectors = np.array(vectors, dtype=float, copy=True)
    if vectors.size == 0:
        return vectors
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def support_mask(matrix: np.ndarray) -> SupportMask:
    """Forbidden pairs are the off-diagonal zeros of the matrix."""
    matrix = np.asarray(matrix)
    n = matrix.shape[0]
    forbidden = (matrix == 0) & ~np.eye(n, dtype=bool)
    forbidden.setflags(write=False)
    return SupportMask(forbidden=forbidden)


@dataclass(frozen=True, eq=False)
class GraphShiftOperator:
    """Symmetric shift operator with cached eigendecomposition and support."""
    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    support: SupportMask
    communities: Optional[np.ndarray] = None
    name: str = "custom"

    @classmethod
    def from_matrix(
        cls,
        matrix: np.ndarray,
        communities: Optional[np.ndarray] = None,
        name: str = "custom",
    ) -> "GraphShiftOperator":
        """Validate, symmetrize exactly and decompose a matrix."""
        eigenvalues, eigenvectors = eigendecompose(matrix)
        matrix = np.asarray(matrix, dtype=float)
        matrix = 0.5 * (matrix + matrix.T)
        return cls(
            matrix=_frozen(matrix),
            eigenvalues=_frozen(eigenvalues),
            eigenvectors=_frozen(eigenvectors),
            support=support_mask(matrix),
            communities=None if communities is None else _frozen(communities).astype(int),
            name=name,
        )

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues))) if self.n else 0.0

    def degrees(self) -> np.ndarray:
        """Number of neighbours of every node (self-loops excluded)."""
        off_diagonal = (self.matrix != 0) & ~np.eye(self.n, dtype=bool)
        return off_diagonal.sum(axis=1)

    def shift(self, x: np.ndarray) -> np.ndarray:
        """One application of S to signals stacked along the last axis."""
        return np.asarray(x, dtype=float) @ self.matrix.T

    def power_apply(self, x: np.ndarray, t: int) -> np.ndarray:
        for _ in range(t):
            x = self.shift(x)
        return x


def gft(operator: GraphShiftOperator, x: SignalLike) -> np.ndarray:
    """Graph Fourier transform V^T x (batched over leading axes)."""
    values = signal_values(x)
    if values.shape[-1] != operator.n:
        raise InvalidInputError(f"Signal has {values.shape[-1]} entries, graph has {operator.n} nodes")
    return values @ operator.eigenvectors


def igft(operator: GraphShiftOperator, spectrum: np.ndarray) -> np.ndarray:
    """Inverse graph Fourier transform V x_hat."""
    spectrum = np.asarray(spectrum, dtype=float)
    if spectrum.shape[-1] != operator.n:
        raise InvalidInputError(f"Spectrum has {spectrum.shape[-1]} entries, graph has {operator.n} nodes")
    return spectrum @ operator.eigenvectors.T


def with_spectrum(operator: GraphShiftOperator, x: SignalLike) -> GraphSignal:
    values = signal_values(x)
    return GraphSignal(values=values, spectrum=gft(operator, values))
