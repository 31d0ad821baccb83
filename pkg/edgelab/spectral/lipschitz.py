"""
Integral-Lipschitz constants of frequency responses.

For a univariate response the constant is the supremum over pairs of
|(lam1 + lam2) / 2 * (h(lam1) - h(lam2)) / (lam1 - lam2)| together with
the derivative form |lam h'(lam)|; both are evaluated on a grid of the
domain and the larger is reported. For multivariate responses the
constant is the supremum of |grad(lams1, lams2) . (lams1 + lams2) / 2|
over sampled pairs, where grad is the telescoping partial-derivative
vector for which h(lams1) - h(lams2) = grad . (lams1 - lams2) exactly.
"""
import logging
from typing import Optional

import numpy as np

from errors import InvalidInputError, NumericalCheckError
from .response import FrequencyResponse, ResponseKind

logger = logging.getLogger(__name__)

DEFAULT_GRID = 2001
IDENTITY_TOLERANCE = 1e-8
# cap on elements of one (rows, block, grid) pair table
PAIR_BLOCK_ELEMENTS = 2_000_000


def _unique_rows(response: FrequencyResponse) -> np.ndarray:
    return np.unique(response.coefficients, axis=0)


def pair_form(response: FrequencyResponse, domain: tuple[float, float] = (-1.0, 1.0),
              grid: int = DEFAULT_GRID, max_elements: int = PAIR_BLOCK_ELEMENTS) -> float:
    """
    Largest pair quotient over distinct grid points.

    Rows of the grid are processed in blocks sized so one block table holds
    at most max_elements entries (and at least one grid row).
    """
    lam = np.linspace(domain[0], domain[1], grid)
    values = FrequencyResponse(_unique_rows(response)).evaluate(lam)
    rows = max(1, max_elements // (values.shape[0] * lam.size))
    best = 0.0
    for start in range(0, lam.size, rows):
        block = slice(start, start + rows)
        gap = lam[block, None] - lam[None, :]
        midpoint = 0.5 * (lam[block, None] + lam[None, :])
        jump = values[:, block, None] - values[:, None, :]
        quotient = np.divide(jump, gap, out=np.zeros_like(jump), where=gap != 0)
        best = max(best, float(np.max(np.abs(midpoint * quotient))))
    return best


def derivative_form(response: FrequencyResponse, domain: tuple[float, float] = (-1.0, 1.0),
                    grid: int = DEFAULT_GRID) -> float:
    lam = np.linspace(domain[0], domain[1], grid)
    slopes = FrequencyResponse(_unique_rows(response)).derivative(lam)
    return float(np.max(np.abs(lam * slopes)))


def lipschitz_constant_univariate(response: FrequencyResponse, domain: tuple[float, float] = (-1.0, 1.0),
                                  grid: int = DEFAULT_GRID) -> float:
    """
    Grid estimate of the integral-Lipschitz constant.

    Args:
        response: univariate response
        domain: closed interval holding the normalized spectrum
        grid: number of equispaced points; nested grids give non-decreasing estimates
    """
    if response.kind is not ResponseKind.UNIVARIATE:
        raise InvalidInputError("Use lipschitz_constant_multivariate for multivariate responses")
    if grid < 2:
        raise InvalidInputError(f"grid must have at least 2 points, got {grid}")
    return max(pair_form(response, domain, grid), derivative_form(response, domain, grid))


def lipschitz_constant_graph_specific(response: FrequencyResponse, eigenvalues: np.ndarray,
                                      tolerance: float = 1e-12) -> float:
    """
    Constant restricted to pairs (lam, lam_i) of the actual spectrum.

    An index without any distinct partner eigenvalue falls back to the
    derivative form |lam_i h_i'(lam_i)|.
    """
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if eigenvalues.shape != (response.n,):
        raise InvalidInputError(f"Expected {response.n} eigenvalues, got shape {eigenvalues.shape}")
    # table[i, j] = h_i(lam_j)
    table = response.evaluate(eigenvalues)
    own = np.diag(table)
    gap = eigenvalues[None, :] - eigenvalues[:, None]
    distinct = np.abs(gap) > tolerance
    midpoint = 0.5 * (eigenvalues[None, :] + eigenvalues[:, None])
    quotient = np.divide(table - own[:, None], gap, out=np.zeros_like(table), where=distinct)
    per_index = np.max(np.abs(midpoint * quotient), axis=1)

    lonely = ~distinct.any(axis=1)
    if lonely.any():
        slopes = np.diag(response.derivative(eigenvalues))
        per_index[lonely] = np.abs(eigenvalues * slopes)[lonely]
    return float(per_index.max()) if per_index.size else 0.0


def lipschitz_gradient(response: FrequencyResponse, first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """
    Telescoping gradient between two multivariate frequencies.

    Entry m is the partial derivative with respect to coordinate m evaluated
    at the point taking coordinates before m from `first` and the rest from
    `second`. Inputs of shape (..., K) give output of shape (..., n, K).
    """
    first = np.asarray(first, dtype=float)
    second = np.asarray(second, dtype=float)
    order = response.order
    if first.shape != second.shape or first.shape[-1] != order:
        raise InvalidInputError(f"Frequencies must both have {order} coordinates")
    columns = np.arange(order)
    gradient = np.zeros(first.shape[:-1] + (response.n, order))
    for m in range(order):
        mixed = np.where(columns < m, first, second)
        mixed[..., m] = 1.0
        products = np.cumprod(mixed, axis=-1)
        # d/d lam_m of sum_k phi^(k) prod_{j<=k} lam_j only keeps k > m
        gradient[..., m] = products[..., m:] @ response.coefficients[:, m + 1:].T
    return gradient


def lipschitz_constant_multivariate(response: FrequencyResponse, first: np.ndarray, second: np.ndarray,
                                    check_identity: bool = True) -> float:
    """
    sup over the given pairs of |grad . (first + second) / 2|.

    Raises:
        NumericalCheckError: the telescoping identity failed for some pair
    """
    first = np.atleast_2d(np.asarray(first, dtype=float))
    second = np.atleast_2d(np.asarray(second, dtype=float))
    if response.order == 0 or first.shape[0] == 0:
        return 0.0
    gradient = lipschitz_gradient(response, first, second)
    if check_identity:
        predicted = np.einsum("pnk,pk->pn", gradient, first - second)
        actual = response.evaluate_multivariate(first) - response.evaluate_multivariate(second)
        scale = np.maximum(1.0, np.abs(actual))
        residual = float(np.max(np.abs(predicted - actual) / scale))
        if residual > IDENTITY_TOLERANCE:
            raise NumericalCheckError(f"Telescoping identity residual {residual:.3e} exceeds {IDENTITY_TOLERANCE}")
    midpoint = 0.5 * (first + second)
    return float(np.max(np.abs(np.einsum("pnk,pk->pn", gradient, midpoint))))


def sample_frequency_pairs(order: int, rng: np.random.Generator, uniform_pairs: int = 2000,
                           graph_points: Optional[np.ndarray] = None,
                           domain: tuple[float, float] = (-1.0, 1.0)) -> tuple[np.ndarray, np.ndarray]:
    """
    Pairs for the multivariate constant: uniform draws from the box, the
    diagonal, and random pairings of graph-induced frequencies in the box.
    """
    low, high = domain
    first = [rng.uniform(low, high, size=(uniform_pairs, order))]
    second = [rng.uniform(low, high, size=(uniform_pairs, order))]

    diagonal = np.linspace(low, high, 101)
    first.append(np.repeat(diagonal[:, None], order, axis=1))
    second.append(np.repeat(rng.permutation(diagonal)[:, None], order, axis=1))

    if graph_points is not None and len(graph_points):
        graph_points = np.asarray(graph_points, dtype=float)
        inside = np.all((graph_points >= low) & (graph_points <= high), axis=1)
        graph_points = graph_points[inside]
        if len(graph_points) > 1:
            first.append(graph_points)
            second.append(graph_points[rng.permutation(len(graph_points))])
        logger.debug(f"[lipschitz] {int(inside.sum())} graph-induced frequencies inside the domain")

    return np.concatenate(first), np.concatenate(second)
