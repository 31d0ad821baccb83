"""
Filter parameter records for the EdgeNet filter classes.

A filter of order K is the tuple of matrices Phi^(0..K); applying it to a
signal gives sum_k Phi^(k) S^k x. Records are immutable once built. The
per-order eigendecompositions used by the spectral analysis are computed
lazily on first access and cached behind a lock so analysis threads can
share one record.
"""
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from errors import InvalidInputError
from graphcore import SupportMask, normalize_signs


class FilterClass(str, Enum):
    """EdgeNet filter classes, from most to least constrained."""
    CONVOLUTIONAL = "convolutional"
    NODE_VARYING = "node_varying"
    SHIFT_INVARIANT = "shift_invariant"
    EIGENVECTOR_SHARING = "eigenvector_sharing"
    GENERAL = "general"

    @classmethod
    def parse(cls, value: "str | FilterClass") -> "FilterClass":
        if isinstance(value, FilterClass):
            return value
        normalized = str(value).strip().lower().replace("-", "_")
        aliases = {"conv": "convolutional", "nv": "node_varying", "si": "shift_invariant",
                   "es": "eigenvector_sharing", "edge": "general"}
        normalized = aliases.get(normalized, normalized)
        try:
            return cls(normalized)
        except ValueError:
            available = [member.value for member in cls]
            raise InvalidInputError(f"Unknown filter class '{value}'. Available: {available}")

    @property
    def is_spectral(self) -> bool:
        """Classes whose frequency response is univariate."""
        return self in (FilterClass.CONVOLUTIONAL, FilterClass.SHIFT_INVARIANT,
                        FilterClass.EIGENVECTOR_SHARING, FilterClass.NODE_VARYING)


@dataclass(frozen=True, eq=False)
class EigenPair:
    """Orthonormal eigenvector columns U and eigenvalues phi of one Phi^(k)."""
    vectors: np.ndarray
    values: np.ndarray


@dataclass(eq=False)
class FilterParams:
    """Parameters of one order-K graph filter."""
    matrices: np.ndarray
    class_tag: FilterClass
    support: Optional[SupportMask] = None
    # conv: h (K+1,), node-varying: diagonals (K+1, n), SI: basis weights (K+1, p)
    coefficients: Optional[np.ndarray] = None
    eigenbases: Optional[list[EigenPair]] = None
    _cache: dict = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self):
        matrices = np.array(self.matrices, dtype=float, copy=True)
        if matrices.ndim != 3 or matrices.shape[1] != matrices.shape[2] or matrices.shape[0] < 1:
            raise InvalidInputError(f"Filter matrices must have shape (K+1, n, n), got {matrices.shape}")
        if not np.all(np.isfinite(matrices)):
            raise InvalidInputError("Filter matrices contain non-finite entries")
        matrices.setflags(write=False)
        self.matrices = matrices
        self.class_tag = FilterClass.parse(self.class_tag)
        if self.coefficients is not None:
            coefficients = np.array(self.coefficients, dtype=float, copy=True)
            coefficients.setflags(write=False)
            self.coefficients = coefficients
        if self.eigenbases is not None and len(self.eigenbases) != self.order + 1:
            raise InvalidInputError("One eigenbasis per filter order is required")

    @property
    def order(self) -> int:
        return self.matrices.shape[0] - 1

    @property
    def n(self) -> int:
        return self.matrices.shape[1]

    def eigenpair(self, k: int) -> EigenPair:
        """Eigenvectors and eigenvalues of Phi^(k), computed once and cached."""
        if self.eigenbases is not None:
            return self.eigenbases[k]
        with self._lock:
            if k not in self._cache:
                self._cache[k] = self._decompose(k)
            return self._cache[k]

    def _decompose(self, k: int) -> EigenPair:
        matrix = self.matrices[k]
        if self.class_tag is FilterClass.NODE_VARYING:
            return EigenPair(vectors=np.eye(self.n), values=np.diag(matrix).copy())
        values, vectors = np.linalg.eigh(0.5 * (matrix + matrix.T))
        return EigenPair(vectors=normalize_signs(vectors), values=values)

    def is_symmetric(self, tolerance: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.matrices - np.swapaxes(self.matrices, 1, 2))) <= tolerance)

    def __getstate__(self):
        state = self.__dict__.copy()
        state.pop("_lock", None)
        state["_cache"] = {}
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()
