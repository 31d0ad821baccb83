"""
Node-domain filter application.
"""
import numpy as np

from errors import InvalidInputError
from graphcore import GraphShiftOperator, GraphSignal, SignalLike, signal_values
from .base import FilterParams


def shifted_signals(operator: GraphShiftOperator, x: np.ndarray, order: int) -> np.ndarray:
    """Stack [x, Sx, ..., S^K x] along a new leading axis."""
    shifts = [np.asarray(x, dtype=float)]
    for _ in range(order):
        shifts.append(operator.shift(shifts[-1]))
    return np.stack(shifts)


def apply(params: FilterParams, operator: GraphShiftOperator, x: SignalLike) -> GraphSignal:
    """
    y = sum_k Phi^(k) S^k x, computed by iterated shifts rather than
    matrix powers. Signals may be batched along leading axes.
    """
    values = signal_values(x)
    if values.shape[-1] != params.n or operator.n != params.n:
        raise InvalidInputError(
            f"Dimension mismatch: filter n={params.n}, graph n={operator.n}, signal n={values.shape[-1]}"
        )
    z = values
    output = z @ params.matrices[0].T
    for k in range(1, params.order + 1):
        z = operator.shift(z)
        output = output + z @ params.matrices[k].T
    return GraphSignal(values=output)
