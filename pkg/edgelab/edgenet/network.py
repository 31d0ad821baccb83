"""
EdgeNet: a cascade of edge-varying filter banks and pointwise nonlinearities
followed by a linear readout.

Layer l computes x_l^f = sigma(sum_g H_l^{fg}(x_{l-1}^g, S)) for f = 1..F,
where H_l^{fg} is an order-K filter of the configured class. Signals are
batched as arrays of shape (B, F, n).
"""
import copy
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from errors import InvalidInputError, UsageError
from filters import FilterParams, scale, shifted_signals
from graphcore import GraphShiftOperator, GraphSignal
from .nonlinearities import get_nonlinearity
from .parameterizations import (
    FixedBankParameterization,
    GraphContext,
    LayerParameterization,
    get_parameterization,
)
from .schemas import EdgeNetConfig

logger = logging.getLogger(__name__)


@dataclass
class LayerCache:
    shifts: np.ndarray
    pre_activation: np.ndarray


@dataclass
class ForwardCache:
    operator: GraphShiftOperator
    inputs: np.ndarray
    layers: list[LayerCache]
    features: np.ndarray


class EdgeNet:
    """Multi-layer EdgeNet with analytic reverse-mode gradients."""

    def __init__(self, config: EdgeNetConfig, operator: GraphShiftOperator,
                 bank: Optional[Sequence[Sequence[Sequence[FilterParams]]]] = None):
        self.config = config
        self.context = GraphContext(operator)
        self.nonlinearity = get_nonlinearity(config.nonlinearity)
        self._bank = None
        if bank is None:
            self.parameterization: LayerParameterization = get_parameterization(self.context, config.class_tag)
        else:
            self.parameterization = FixedBankParameterization(self.context, config.class_tag)
        if config.target_node is not None and not 0 <= config.target_node < operator.n:
            raise InvalidInputError(f"target_node {config.target_node} outside 0..{operator.n - 1}")

        self.params: dict[str, np.ndarray] = {}
        self._cache: Optional[ForwardCache] = None
        self._initialize(np.random.default_rng(config.seed))
        if bank is not None:
            self._load_bank(bank)

    @classmethod
    def from_filter_bank(cls, config: EdgeNetConfig, operator: GraphShiftOperator,
                         bank: Sequence[Sequence[Sequence[FilterParams]]]) -> "EdgeNet":
        """Network whose layer l, output f, input g filter is bank[l][f][g]."""
        return cls(config, operator, bank=bank)

    # ============ Structure ============

    @property
    def n(self) -> int:
        return self.context.n

    @property
    def operator(self) -> GraphShiftOperator:
        return self.context.operator

    def layer_inputs(self, layer: int) -> int:
        return self.config.in_features if layer == 0 else self.config.features

    def _readout_shape(self) -> tuple[int, int]:
        if self.config.readout == "flatten":
            return (self.config.features * self.n, self.config.outputs)
        return (self.config.features, self.config.outputs)

    def _initialize(self, rng: np.random.Generator):
        config = self.config
        for layer in range(config.layers):
            self.params[f"layer{layer}"] = self.parameterization.initialize(
                rng, config.features, self.layer_inputs(layer), config.order, config.init_scale
            )
        fan_in, outputs = self._readout_shape()
        self.params["readout.weight"] = rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=(fan_in, outputs))
        self.params["readout.bias"] = np.zeros(outputs)

    def _load_bank(self, bank):
        config = self.config
        if len(bank) != config.layers:
            raise InvalidInputError(f"Bank has {len(bank)} layers, config expects {config.layers}")
        self._bank = []
        for layer, grid in enumerate(bank):
            expected = (config.features, self.layer_inputs(layer))
            if len(grid) != expected[0] or any(len(row) != expected[1] for row in grid):
                raise InvalidInputError(f"Layer {layer} bank must be a {expected[0]}x{expected[1]} grid")
            for row in grid:
                for params in row:
                    if params.n != self.n or params.order != config.order:
                        raise InvalidInputError("Every filter in the bank must match n and K of the network")
            self._bank.append([list(row) for row in grid])
            self.params[f"layer{layer}"] = np.array(
                [[params.matrices for params in row] for row in grid], dtype=float
            )

    def layer_filters(self, layer: int) -> list[list[FilterParams]]:
        """F x G grid of FilterParams of one layer."""
        if self._bank is not None:
            return self._bank[layer]
        theta = self.params[f"layer{layer}"]
        return [[self.parameterization.to_filter(theta[f, g]) for g in range(theta.shape[1])]
                for f in range(theta.shape[0])]

    def filters(self) -> list[FilterParams]:
        """Every filter of the network, flattened."""
        return [params for layer in range(self.config.layers)
                for row in self.layer_filters(layer) for params in row]

    def count_parameters(self) -> int:
        total = sum(self.parameterization.count(self.params[f"layer{layer}"]) for layer in range(self.config.layers))
        return total + self.params["readout.weight"].size + self.params["readout.bias"].size

    def copy(self) -> "EdgeNet":
        clone = copy.copy(self)
        clone.params = {name: value.copy() for name, value in self.params.items()}
        clone._cache = None
        return clone

    def rescaled(self, factor: float) -> "EdgeNet":
        """Copy with every filter multiplied by factor (readout untouched)."""
        clone = self.copy()
        for layer in range(self.config.layers):
            clone.params[f"layer{layer}"] = self.params[f"layer{layer}"] * factor
        if self._bank is not None:
            clone._bank = [[[scale(params, factor) for params in row] for row in grid] for grid in self._bank]
        return clone

    def project(self):
        """Re-impose parameter constraints after an optimizer step."""
        for layer in range(self.config.layers):
            key = f"layer{layer}"
            self.params[key] = self.parameterization.project(self.params[key])

    # ============ Forward ============

    def _as_batch(self, x) -> np.ndarray:
        values = x.values if isinstance(x, GraphSignal) else np.asarray(x, dtype=float)
        if values.ndim == 1:
            values = values[None, None, :]
        elif values.ndim == 2:
            if self.config.in_features != 1:
                raise InvalidInputError(
                    f"2-d input is read as (batch, n) and needs in_features=1, got {self.config.in_features}"
                )
            values = values[:, None, :]
        if values.ndim != 3 or values.shape[1] != self.config.in_features or values.shape[2] != self.n:
            raise InvalidInputError(
                f"Expected input of shape (B, {self.config.in_features}, {self.n}), got {values.shape}"
            )
        return values

    def _check_operator(self, operator: Optional[GraphShiftOperator]) -> GraphShiftOperator:
        operator = operator or self.operator
        if operator.n != self.n:
            raise InvalidInputError(f"Network built for {self.n} nodes, operator has {operator.n}")
        return operator

    def embed(self, x, operator: Optional[GraphShiftOperator] = None) -> np.ndarray:
        """Pre-readout features x_L of shape (B, F, n)."""
        features, _ = self._propagate(self._as_batch(x), self._check_operator(operator))
        return features

    def _propagate(self, inputs: np.ndarray, operator: GraphShiftOperator) -> tuple[np.ndarray, list[LayerCache]]:
        caches = []
        signal = inputs
        for layer in range(self.config.layers):
            shifts = shifted_signals(operator, signal, self.config.order)
            pre_activation = self.parameterization.forward(self.params[f"layer{layer}"], shifts)
            caches.append(LayerCache(shifts=shifts, pre_activation=pre_activation))
            signal = self.nonlinearity.forward(pre_activation)
        return signal, caches

    def _readout(self, features: np.ndarray) -> np.ndarray:
        weight, bias = self.params["readout.weight"], self.params["readout.bias"]
        if self.config.readout == "flatten":
            return features.reshape(features.shape[0], -1) @ weight + bias
        if self.config.readout == "pool":
            return features.mean(axis=2) @ weight + bias
        per_node = np.einsum("bfn,fc->bnc", features, weight) + bias
        if self.config.target_node is not None:
            return per_node[:, self.config.target_node, :]
        return per_node

    def forward(self, x, operator: Optional[GraphShiftOperator] = None) -> np.ndarray:
        """
        Run the network and cache activations for backward.

        Args:
            x: (n,), (B, n) or (B, F0, n) input signals
            operator: shift operator to run on; defaults to the training graph

        Returns:
            readout output, (B, C) or (B, n, C) for an untargeted node readout
        """
        operator = self._check_operator(operator)
        inputs = self._as_batch(x)
        features, layers = self._propagate(inputs, operator)
        self._cache = ForwardCache(operator=operator, inputs=inputs, layers=layers, features=features)
        return self._readout(features)

    # ============ Backward ============

    def _readout_backward(self, features: np.ndarray, grad_out: np.ndarray) -> tuple[dict, np.ndarray]:
        weight = self.params["readout.weight"]
        batch = features.shape[0]
        if self.config.readout == "flatten":
            flat = features.reshape(batch, -1)
            grads = {"readout.weight": flat.T @ grad_out, "readout.bias": grad_out.sum(axis=0)}
            return grads, (grad_out @ weight.T).reshape(features.shape)
        if self.config.readout == "pool":
            pooled = features.mean(axis=2)
            grads = {"readout.weight": pooled.T @ grad_out, "readout.bias": grad_out.sum(axis=0)}
            grad_pooled = grad_out @ weight.T
            return grads, np.repeat(grad_pooled[:, :, None] / self.n, self.n, axis=2)
        if self.config.target_node is not None:
            scattered = np.zeros((batch, self.n, grad_out.shape[-1]))
            scattered[:, self.config.target_node, :] = grad_out
            grad_out = scattered
        grads = {"readout.weight": np.einsum("bfn,bnc->fc", features, grad_out),
                 "readout.bias": grad_out.sum(axis=(0, 1))}
        return grads, np.einsum("bnc,fc->bfn", grad_out, weight)

    def backward(self, grad_out: np.ndarray) -> dict[str, np.ndarray]:
        """
        Gradients of a loss with respect to every parameter, given the
        gradient with respect to the last forward output.

        Raises:
            UsageError: forward has not been run
        """
        if self._cache is None:
            raise UsageError("backward called before forward")
        cache = self._cache
        grad_out = np.asarray(grad_out, dtype=float)
        grads, grad_signal = self._readout_backward(cache.features, grad_out)
        matrix = cache.operator.matrix

        for layer in reversed(range(self.config.layers)):
            layer_cache = cache.layers[layer]
            grad_pre = grad_signal * self.nonlinearity.derivative(layer_cache.pre_activation)
            grad_theta, grad_shifts = self.parameterization.backward(
                self.params[f"layer{layer}"], layer_cache.shifts, grad_pre
            )
            grads[f"layer{layer}"] = grad_theta
            if layer == 0:
                break
            # adjoint of Z_k = S^k x through the shift recursion
            grad_signal = grad_shifts[-1]
            for k in range(grad_shifts.shape[0] - 2, -1, -1):
                grad_signal = grad_shifts[k] + grad_signal @ matrix
        return grads


def perturbed_inference(net: EdgeNet, operator: GraphShiftOperator, x) -> np.ndarray:
    """Forward pass on a different operator with unchanged parameters."""
    return net.forward(x, operator)


def count_parameters(net: EdgeNet) -> int:
    return net.count_parameters()
