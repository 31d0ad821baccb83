"""
Spectral-domain reconstruction of filter outputs.

These are independent oracles for filters.apply: they rebuild the output
from the graph Fourier transform and the filter eigenstructure, and agree
with the node-domain computation to rounding error.
"""
from dataclasses import dataclass

import numpy as np

from errors import InvalidInputError
from filters import FilterClass, FilterParams
from graphcore import GraphShiftOperator, GraphSignal, SignalLike, gft, igft, signal_values
from .response import FrequencyResponse

DEGENERATE_THRESHOLD = 1e-12


@dataclass(frozen=True, eq=False)
class MultivariateFrequency:
    """Scaled frequencies lam^(k) = beta^(k) lam_i for one (i, j, l) triple."""
    values: np.ndarray
    base_eigenvalue: float
    scale_factors: np.ndarray


def _check_signal(operator: GraphShiftOperator, x: SignalLike, n: int) -> np.ndarray:
    values = signal_values(x)
    if values.ndim != 1 or values.shape[0] != operator.n or operator.n != n:
        raise InvalidInputError(f"Expected a single signal on {n} nodes, got shape {values.shape}")
    return values


def spectral_apply_si(response: FrequencyResponse, operator: GraphShiftOperator, x: SignalLike) -> GraphSignal:
    """y = V diag(h_i(lam_i)) V^T x."""
    values = _check_signal(operator, x, response.n)
    spectrum = gft(operator, values)
    return GraphSignal(values=igft(operator, response.at_eigenvalues(operator.eigenvalues) * spectrum))


def _cross(operator: GraphShiftOperator, vectors: np.ndarray) -> np.ndarray:
    # C[i, j] = <v_i, u_j>
    return operator.eigenvectors.T @ vectors


def spectral_apply_es(params: FilterParams, operator: GraphShiftOperator, x: SignalLike) -> GraphSignal:
    """
    y_hat_l = sum_i sum_j x_hat_i <v_i, u_j> <u_j, v_l> h_j(lam_i) for a
    filter whose orders share one eigenbasis U.
    """
    if params.class_tag not in (FilterClass.EIGENVECTOR_SHARING, FilterClass.NODE_VARYING,
                                FilterClass.CONVOLUTIONAL, FilterClass.SHIFT_INVARIANT):
        raise InvalidInputError(f"spectral_apply_es needs a shared eigenbasis, got {params.class_tag.value}")
    values = _check_signal(operator, x, params.n)
    spectrum = gft(operator, values)
    cross = _cross(operator, params.eigenpair(0).vectors)
    coefficients = np.stack([params.eigenpair(k).values for k in range(params.order + 1)], axis=1)
    # table[i, j] = h_j(lam_i)
    table = FrequencyResponse(coefficients).evaluate(operator.eigenvalues).T
    weights = (spectrum[:, None] * cross * table).sum(axis=0)
    return GraphSignal(values=igft(operator, cross @ weights))


def spectral_apply_edge(params: FilterParams, operator: GraphShiftOperator, x: SignalLike) -> GraphSignal:
    """
    y_hat_l = sum_k sum_i sum_j x_hat_i phi_j^(k) <v_i, u_j^(k)> <u_j^(k), v_l> lam_i^k
    for a symmetric filter with per-order eigenbases.
    """
    values = _check_signal(operator, x, params.n)
    spectrum = gft(operator, values)
    output = np.zeros(params.n)
    for k in range(params.order + 1):
        pair = params.eigenpair(k)
        cross = _cross(operator, pair.vectors)
        weights = cross.T @ (spectrum * operator.eigenvalues ** k)
        output += cross @ (pair.values * weights)
    return GraphSignal(values=igft(operator, output))


def _cross_products(params: FilterParams, operator: GraphShiftOperator) -> np.ndarray:
    """c[k, i, j, l] = <v_i, u_j^(k)> <u_j^(k), v_l>."""
    crosses = np.stack([_cross(operator, params.eigenpair(k).vectors) for k in range(params.order + 1)])
    return crosses[:, :, :, None] * np.swapaxes(crosses, 1, 2)[:, None, :, :]


def _scale_factors(products: np.ndarray) -> np.ndarray:
    """beta^(k) = c^(k) / c^(k-1), or c^(k) where the denominator vanishes."""
    numerators, denominators = products[1:], products[:-1]
    degenerate = np.abs(denominators) < DEGENERATE_THRESHOLD
    safe = np.where(degenerate, 1.0, denominators)
    return np.where(degenerate, numerators, numerators / safe)


def spectral_apply_scaled(params: FilterParams, operator: GraphShiftOperator, x: SignalLike) -> GraphSignal:
    """
    Scaled-eigenvalue form of the general filter output,
    y_hat_l = sum_i sum_j x_hat_i c^(0) sum_k phi_j^(k) prod_{m<=k} beta^(m) lam_i.

    Agrees with spectral_apply_edge whenever no c^(k-1) vanishes.
    Memory grows as K n^3.
    """
    values = _check_signal(operator, x, params.n)
    spectrum = gft(operator, values)
    products = _cross_products(params, operator)
    factors = _scale_factors(products)
    lam = operator.eigenvalues[:, None, None]
    inner = np.zeros(products.shape[1:])
    running = np.ones(products.shape[1:])
    for k in range(params.order + 1):
        if k:
            running = running * factors[k - 1] * lam
        inner += params.eigenpair(k).values[None, :, None] * running
    output = np.einsum("i,ijl,ijl->l", spectrum, products[0], inner)
    return GraphSignal(values=igft(operator, output))


def scaled_frequencies(params: FilterParams, operator: GraphShiftOperator, i: int, j: int, l: int) -> MultivariateFrequency:
    """Multivariate frequency lam^(k) = beta^(k) lam_i for one triple."""
    crosses = [_cross(operator, params.eigenpair(k).vectors) for k in range(params.order + 1)]
    products = np.array([cross[i, j] * cross[l, j] for cross in crosses])[:, None]
    factors = _scale_factors(products)[:, 0]
    base = float(operator.eigenvalues[i])
    return MultivariateFrequency(values=factors * base, base_eigenvalue=base, scale_factors=factors)


def graph_frequency_pairs(params: FilterParams, operator: GraphShiftOperator,
                           rng: np.random.Generator = None, max_points: int = 8000) -> np.ndarray:
    """
    Graph-induced multivariate frequencies, shape (points, K).

    All n^3 triples are used when they fit in max_points, otherwise a
    random subset of triples.
    """
    n = params.n
    if params.order == 0:
        return np.zeros((0, 0))
    crosses = np.stack([_cross(operator, params.eigenpair(k).vectors) for k in range(params.order + 1)])
    if n ** 3 <= max_points:
        i, j, l = (axis.ravel() for axis in np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij"))
    else:
        rng = rng or np.random.default_rng(0)
        i, j, l = (rng.integers(0, n, size=max_points) for _ in range(3))
    products = crosses[:, i, j] * crosses[:, l, j]
    factors = _scale_factors(products)
    return (factors * operator.eigenvalues[i][None, :]).T
