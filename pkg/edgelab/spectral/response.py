"""
Frequency responses of the filter classes.

A univariate response row i is the polynomial h_i(lam) = sum_k phi_i^(k) lam^k.
A multivariate response row i is h_i(lams) = sum_k phi_i^(k) prod_{m<=k} lams[m-1],
which collapses to the univariate one on the diagonal lams = (lam, ..., lam).
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.polynomial import polynomial

from errors import InvalidInputError
from filters import FilterClass, FilterParams, scale
from graphcore import GraphShiftOperator


class ResponseKind(str, Enum):
    UNIVARIATE = "univariate"
    MULTIVARIATE = "multivariate"


@dataclass(frozen=True, eq=False)
class FrequencyResponse:
    """Per-index polynomial coefficients, shape (n, K+1)."""
    coefficients: np.ndarray
    kind: ResponseKind = ResponseKind.UNIVARIATE

    @property
    def order(self) -> int:
        return self.coefficients.shape[1] - 1

    @property
    def n(self) -> int:
        return self.coefficients.shape[0]

    def evaluate(self, lam: np.ndarray) -> np.ndarray:
        """Univariate evaluation on points lam; returns shape (n, len(lam))."""
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        return polynomial.polyval(lam, self.coefficients.T)

    def derivative(self, lam: np.ndarray) -> np.ndarray:
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        if self.order == 0:
            return np.zeros((self.n, lam.size))
        return polynomial.polyval(lam, polynomial.polyder(self.coefficients.T, axis=0))

    def at_eigenvalues(self, eigenvalues: np.ndarray) -> np.ndarray:
        """h_i(lam_i) for each index i."""
        eigenvalues = np.asarray(eigenvalues, dtype=float)
        if eigenvalues.shape != (self.n,):
            raise InvalidInputError(f"Expected {self.n} eigenvalues, got shape {eigenvalues.shape}")
        powers = np.vander(eigenvalues, self.order + 1, increasing=True)
        return np.sum(self.coefficients * powers, axis=1)

    def evaluate_multivariate(self, points: np.ndarray) -> np.ndarray:
        """
        Evaluate every row at multivariate points of shape (..., K).

        Returns:
            array of shape (..., n)
        """
        points = np.asarray(points, dtype=float)
        if points.shape[-1] != self.order:
            raise InvalidInputError(f"Expected points with {self.order} coordinates, got {points.shape[-1]}")
        ones = np.ones(points.shape[:-1] + (1,))
        products = np.concatenate([ones, np.cumprod(points, axis=-1)], axis=-1)
        return products @ self.coefficients.T


def si_response(params: FilterParams, operator: GraphShiftOperator) -> FrequencyResponse:
    """phi_i^(k) = (V^T Phi^(k) V)_ii for convolutional and shift-invariant filters."""
    if params.class_tag is FilterClass.CONVOLUTIONAL:
        taps = params.coefficients if params.coefficients is not None else params.matrices[:, 0, 0]
        return FrequencyResponse(coefficients=np.tile(taps, (params.n, 1)))
    if params.class_tag is not FilterClass.SHIFT_INVARIANT:
        raise InvalidInputError(f"si_response needs a convolutional or shift-invariant filter, got {params.class_tag.value}")
    vectors = operator.eigenvectors
    coefficients = np.stack([
        np.einsum("ji,jk,ki->i", vectors, matrix, vectors) for matrix in params.matrices
    ], axis=1)
    return FrequencyResponse(coefficients=coefficients)


def es_response(params: FilterParams) -> FrequencyResponse:
    """Univariate response on the shared eigenbasis of an ES (or node-varying) filter."""
    if params.class_tag not in (FilterClass.EIGENVECTOR_SHARING, FilterClass.NODE_VARYING,
                                FilterClass.CONVOLUTIONAL):
        raise InvalidInputError(f"es_response needs an eigenvector-sharing filter, got {params.class_tag.value}")
    coefficients = np.stack([params.eigenpair(k).values for k in range(params.order + 1)], axis=1)
    return FrequencyResponse(coefficients=coefficients)


def edge_response(params: FilterParams) -> FrequencyResponse:
    """Multivariate response built from the per-order eigenvalues phi^(k)."""
    if not params.is_symmetric(1e-10):
        raise InvalidInputError("Spectral analysis of general filters requires symmetric Phi^(k)")
    coefficients = np.stack([params.eigenpair(k).values for k in range(params.order + 1)], axis=1)
    return FrequencyResponse(coefficients=coefficients, kind=ResponseKind.MULTIVARIATE)


def filter_response(params: FilterParams, operator: GraphShiftOperator) -> FrequencyResponse:
    """Pick the response matching the filter's class."""
    if params.class_tag in (FilterClass.CONVOLUTIONAL, FilterClass.SHIFT_INVARIANT):
        return si_response(params, operator)
    if params.class_tag in (FilterClass.EIGENVECTOR_SHARING, FilterClass.NODE_VARYING):
        return es_response(params)
    return edge_response(params)


def response_bound(response: FrequencyResponse, domain: tuple[float, float] = (-1.0, 1.0),
                   grid: int = 2001, points: np.ndarray = None) -> float:
    """max |h_i| over a grid (univariate) or given points (multivariate)."""
    if response.kind is ResponseKind.MULTIVARIATE:
        if points is None:
            raise InvalidInputError("Multivariate bounds need explicit sample points")
        return float(np.max(np.abs(response.evaluate_multivariate(points))))
    lam = np.linspace(domain[0], domain[1], grid)
    return float(np.max(np.abs(response.evaluate(lam))))


def certify(params: FilterParams, operator: GraphShiftOperator, grid: int = 2001,
            points: np.ndarray = None) -> tuple[FilterParams, float]:
    """
    Enforce max |h_i| <= 1 on the evaluation grid.

    Returns:
        (filter, factor) where factor = 1 when the filter already satisfies
        the bound, otherwise 1 / max |h_i| and the filter is rescaled by it.
    """
    response = filter_response(params, operator)
    if response.kind is ResponseKind.MULTIVARIATE and points is None:
        points = np.random.default_rng(0).uniform(-1.0, 1.0, size=(4000, response.order))
    peak = response_bound(response, grid=grid, points=points)
    if peak <= 1.0 or peak == 0.0:
        return params, 1.0
    return scale(params, 1.0 / peak), 1.0 / peak
