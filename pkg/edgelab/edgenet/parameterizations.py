"""
Trainable parameterizations of an EdgeNet layer, one per filter class.

A layer maps shifted inputs Z of shape (K+1, B, G, n), with Z[k] = S^k X,
to pre-activations U of shape (B, F, n). Every parameterization owns its
parameter tensor layout, the forward contraction, its reverse-mode
derivative and the conversion of one (f, g) slice to a FilterParams.
"""
import os
import threading
from abc import ABC, abstractmethod
from typing import Optional

import numpy as np

from errors import InvalidInputError
from filters import (
    FilterClass,
    FilterParams,
    SIBasis,
    build_si_basis,
    make_convolutional,
    make_es_params,
    make_general,
    make_node_varying,
    make_si_params,
)
from graphcore import GraphShiftOperator


class GraphContext:
    """The graph a network was built on, with its SI basis computed on demand."""

    def __init__(self, operator: GraphShiftOperator):
        self.operator = operator
        self._basis: Optional[SIBasis] = None
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self.operator.n

    @property
    def basis(self) -> SIBasis:
        with self._lock:
            if self._basis is None:
                self._basis = build_si_basis(self.operator)
            return self._basis

    def __getstate__(self):
        return {"operator": self.operator, "_basis": self._basis}

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()


class LayerParameterization(ABC):
    """Base class for layer parameterizations."""

    def __init__(self, context: GraphContext):
        self.context = context

    @property
    @abstractmethod
    def name(self) -> str:
        """Parameterization name."""
        pass

    @property
    @abstractmethod
    def class_tag(self) -> FilterClass:
        pass

    @abstractmethod
    def shape(self, f_out: int, f_in: int, order: int) -> tuple[int, ...]:
        pass

    @abstractmethod
    def forward(self, theta: np.ndarray, shifts: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def backward(self, theta: np.ndarray, shifts: np.ndarray, grad_u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return (d loss / d theta, d loss / d shifts)."""
        pass

    @abstractmethod
    def to_filter(self, theta_slice: np.ndarray) -> FilterParams:
        """FilterParams for one (f, g) slice of theta."""
        pass

    @abstractmethod
    def from_filter(self, params: FilterParams) -> np.ndarray:
        """Inverse of to_filter."""
        pass

    def initialize(self, rng: np.random.Generator, f_out: int, f_in: int, order: int, scale: float = 1.0) -> np.ndarray:
        fan_in = f_in * (order + 1)
        theta = rng.normal(0.0, scale / np.sqrt(fan_in), size=self.shape(f_out, f_in, order))
        return self.project(theta)

    def project(self, theta: np.ndarray) -> np.ndarray:
        """Map theta back onto the admissible set after an optimizer step."""
        return theta

    def count(self, theta: np.ndarray) -> int:
        """Number of free parameters in theta."""
        return int(theta.size)


class ConvolutionalParameterization(LayerParameterization):
    """theta[f, g, k] = h^(k) of filter (f, g)."""

    @property
    def name(self) -> str:
        return "convolutional"

    @property
    def class_tag(self) -> FilterClass:
        return FilterClass.CONVOLUTIONAL

    def shape(self, f_out, f_in, order):
        return (f_out, f_in, order + 1)

    def forward(self, theta, shifts):
        return np.einsum("fgk,kbgi->bfi", theta, shifts)

    def backward(self, theta, shifts, grad_u):
        return (np.einsum("bfi,kbgi->fgk", grad_u, shifts),
                np.einsum("fgk,bfi->kbgi", theta, grad_u))

    def to_filter(self, theta_slice):
        return make_convolutional(theta_slice, self.context.n)

    def from_filter(self, params):
        return params.matrices[:, 0, 0].copy()


class NodeVaryingParameterization(LayerParameterization):
    """theta[f, g, k, i] = D^(k)_ii of filter (f, g)."""

    @property
    def name(self) -> str:
        return "node_varying"

    @property
    def class_tag(self) -> FilterClass:
        return FilterClass.NODE_VARYING

    def shape(self, f_out, f_in, order):
        return (f_out, f_in, order + 1, self.context.n)

    def forward(self, theta, shifts):
        return np.einsum("fgki,kbgi->bfi", theta, shifts)

    def backward(self, theta, shifts, grad_u):
        return (np.einsum("bfi,kbgi->fgki", grad_u, shifts),
                np.einsum("fgki,bfi->kbgi", theta, grad_u))

    def to_filter(self, theta_slice):
        return make_node_varying(theta_slice)

    def from_filter(self, params):
        return np.stack([np.diag(matrix) for matrix in params.matrices])


class EigenvectorSharingParameterization(NodeVaryingParameterization):
    """ES networks are trained through the diagonal (U = I) member of the class."""

    @property
    def name(self) -> str:
        return "eigenvector_sharing"

    @property
    def class_tag(self) -> FilterClass:
        return FilterClass.EIGENVECTOR_SHARING

    def to_filter(self, theta_slice):
        return make_es_params(np.eye(self.context.n), theta_slice)


class ShiftInvariantParameterization(LayerParameterization):
    """
    theta[f, g, k, :] = alpha^(k), weights over the SI basis B, so that
    Phi^(k) = V diag(B alpha^(k)) V^T.
    """

    @property
    def name(self) -> str:
        return "shift_invariant"

    @property
    def class_tag(self) -> FilterClass:
        return FilterClass.SHIFT_INVARIANT

    def shape(self, f_out, f_in, order):
        return (f_out, f_in, order + 1, self.context.basis.dimension)

    def initialize(self, rng, f_out, f_in, order, scale=1.0):
        # Unit-norm basis vectors spread omega over n entries; rescale so each
        # omega_i has the same spread as a convolutional tap.
        theta = super().initialize(rng, f_out, f_in, order, scale)
        return theta * np.sqrt(self.context.n / self.context.basis.dimension)

    def forward(self, theta, shifts):
        basis = self.context.basis
        vectors = basis.eigenvectors
        omega = basis.eigenvalues_for(theta)
        spectra = shifts @ vectors
        return np.einsum("fgkm,kbgm->bfm", omega, spectra) @ vectors.T

    def backward(self, theta, shifts, grad_u):
        basis = self.context.basis
        vectors = basis.eigenvectors
        omega = basis.eigenvalues_for(theta)
        spectra = shifts @ vectors
        grad_hat = grad_u @ vectors
        grad_omega = np.einsum("bfm,kbgm->fgkm", grad_hat, spectra)
        grad_spectra = np.einsum("fgkm,bfm->kbgm", omega, grad_hat)
        return basis.weights_for(grad_omega), grad_spectra @ vectors.T

    def to_filter(self, theta_slice):
        return make_si_params(self.context.basis, theta_slice)

    def from_filter(self, params):
        if params.coefficients is not None and params.coefficients.shape[-1] == self.context.basis.dimension:
            return params.coefficients.copy()
        vectors = self.context.basis.eigenvectors
        omegas = np.stack([np.einsum("ji,jk,ki->i", vectors, matrix, vectors) for matrix in params.matrices])
        return self.context.basis.weights_for(omegas)


class GeneralParameterization(LayerParameterization):
    """theta[f, g, k, i, j] = Phi^(k)_ij, zero on the forbidden support."""

    @property
    def name(self) -> str:
        return "general"

    @property
    def class_tag(self) -> FilterClass:
        return FilterClass.GENERAL

    def shape(self, f_out, f_in, order):
        n = self.context.n
        return (f_out, f_in, order + 1, n, n)

    def initialize(self, rng, f_out, f_in, order, scale=1.0):
        # Spread the filter energy over the allowed entries of each row.
        theta = super().initialize(rng, f_out, f_in, order, scale)
        row_support = self.context.operator.support.allowed.sum(axis=1, keepdims=True)
        return theta / np.sqrt(row_support)

    def forward(self, theta, shifts):
        return np.einsum("fgkij,kbgj->bfi", theta, shifts)

    def backward(self, theta, shifts, grad_u):
        grad_theta = np.einsum("bfi,kbgj->fgkij", grad_u, shifts)
        return (self.project(grad_theta),
                np.einsum("fgkij,bfi->kbgj", theta, grad_u))

    def project(self, theta):
        return self.context.operator.support.project(theta)

    def count(self, theta):
        allowed = int(self.context.operator.support.allowed.sum())
        return int(theta.size // (self.context.n ** 2) * allowed)

    def to_filter(self, theta_slice):
        return make_general(theta_slice, self.context.operator.support)

    def from_filter(self, params):
        return self.project(np.array(params.matrices))


class FixedBankParameterization(GeneralParameterization):
    """
    Dense matrices taken from an explicit filter bank. Used for analysis
    networks whose filters are built spectrally; the class tag reported is
    the bank's.
    """

    def __init__(self, context: GraphContext, class_tag: FilterClass):
        super().__init__(context)
        self._class_tag = class_tag

    @property
    def name(self) -> str:
        return "fixed_bank"

    @property
    def class_tag(self) -> FilterClass:
        return self._class_tag

    def project(self, theta):
        return theta

    def count(self, theta):
        return int(theta.size)


# Registry of available parameterizations
_parameterizations: dict[str, type[LayerParameterization]] = {}


def register_parameterization(name: str, parameterization_class: type[LayerParameterization]):
    """Register a parameterization class."""
    _parameterizations[name] = parameterization_class


def get_parameterization(context: GraphContext, name: "Optional[str | FilterClass]" = None) -> LayerParameterization:
    """
    Get a parameterization bound to a graph.
    If name is None, uses EDGELAB_PARAMETERIZATION env var or defaults to 'convolutional'.
    """
    if name is None:
        name = os.getenv("EDGELAB_PARAMETERIZATION", "convolutional")
    if isinstance(name, FilterClass):
        name = name.value

    if name not in _parameterizations:
        available = list(_parameterizations.keys())
        raise InvalidInputError(f"Unknown parameterization '{name}'. Available: {available}")

    return _parameterizations[name](context)


def list_parameterizations() -> list[str]:
    return list(_parameterizations.keys())


register_parameterization("convolutional", ConvolutionalParameterization)
register_parameterization("node_varying", NodeVaryingParameterization)
register_parameterization("eigenvector_sharing", EigenvectorSharingParameterization)
register_parameterization("shift_invariant", ShiftInvariantParameterization)
register_parameterization("general", GeneralParameterization)
