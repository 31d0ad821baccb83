"""
Mini-batch Adam training and evaluation of EdgeNets.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from tqdm import tqdm

from errors import InvalidInputError
from graphcore import GraphShiftOperator
from .network import EdgeNet
from .optim import Adam
from .schemas import EpochMetrics, TrainingConfig

logger = logging.getLogger(__name__)


@dataclass
class TrainingResult:
    net: EdgeNet
    history: list[EpochMetrics] = field(default_factory=list)

    def losses(self) -> list[float]:
        return [entry.train_loss for entry in self.history]


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its gradient with respect to the logits."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    batch = logits.shape[0]
    labels = labels.astype(int)
    loss = -float(log_probs[np.arange(batch), labels].mean())
    grad = np.exp(log_probs)
    grad[np.arange(batch), labels] -= 1.0
    return loss, grad / batch


def mean_squared_error(predictions: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error over the batch and its gradient."""
    targets = np.asarray(targets, dtype=float).reshape(predictions.shape)
    residual = predictions - targets
    return float(np.mean(residual ** 2)), 2.0 * residual / residual.size


def _loss(task: str, outputs: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    if task == "classification":
        return softmax_cross_entropy(outputs, targets)
    return mean_squared_error(outputs, targets)


def accuracy(net: EdgeNet, signals: np.ndarray, labels: np.ndarray,
             operator: Optional[GraphShiftOperator] = None) -> float:
    logits = net.forward(signals, operator)
    return float(np.mean(np.argmax(logits, axis=1) == labels.astype(int)))


def rmse(net: EdgeNet, signals: np.ndarray, targets: np.ndarray,
         operator: Optional[GraphShiftOperator] = None) -> float:
    predictions = net.forward(signals, operator).reshape(-1)
    return float(np.sqrt(np.mean((predictions - np.asarray(targets, dtype=float)) ** 2)))


def evaluate(net: EdgeNet, signals: np.ndarray, targets: np.ndarray, task: str = "classification",
             operator: Optional[GraphShiftOperator] = None) -> float:
    """Accuracy for classification, RMSE for regression."""
    if task == "classification":
        return accuracy(net, signals, targets, operator)
    return rmse(net, signals, targets, operator)


def train(
    net: EdgeNet,
    train_data: tuple[np.ndarray, np.ndarray],
    config: TrainingConfig,
    validation_data: Optional[tuple[np.ndarray, np.ndarray]] = None,
) -> TrainingResult:
    """
    Train a network in place with Adam.

    Args:
        net: network to train; constrained parameterizations are re-projected after every step
        train_data: (signals, targets)
        config: optimizer and loop settings
        validation_data: optional (signals, targets) scored after every epoch

    Returns:
        TrainingResult with per-epoch metrics
    """
    signals, targets = train_data
    signals = np.asarray(signals, dtype=float)
    targets = np.asarray(targets)
    if len(signals) == 0:
        raise InvalidInputError("Cannot train on an empty dataset")
    if len(signals) != len(targets):
        raise InvalidInputError(f"Got {len(signals)} signals and {len(targets)} targets")

    rng = np.random.default_rng(config.seed)
    optimizer = Adam(lr=config.lr, beta1=config.beta1, beta2=config.beta2)
    result = TrainingResult(net=net)

    epochs = range(1, config.epochs + 1)
    if config.progress:
        epochs = tqdm(epochs, desc=f"train {net.config.class_tag.value}", leave=False)

    for epoch in epochs:
        order = rng.permutation(len(signals))
        total, seen = 0.0, 0
        for start in range(0, len(order), config.batch_size):
            batch = order[start:start + config.batch_size]
            outputs = net.forward(signals[batch])
            loss, grad = _loss(config.task, outputs, targets[batch])
            grads = net.backward(grad)
            optimizer.step(net.params, grads)
            net.project()
            total += loss * len(batch)
            seen += len(batch)

        metrics = EpochMetrics(epoch=epoch, train_loss=total / seen)
        if validation_data is not None and len(validation_data[0]):
            outputs = net.forward(validation_data[0])
            metrics.validation_loss, _ = _loss(config.task, outputs, np.asarray(validation_data[1]))
            metrics.validation_metric = evaluate(net, validation_data[0], validation_data[1], config.task)
        result.history.append(metrics)
        logger.debug(f"[train] epoch {epoch} loss={metrics.train_loss:.4f} val={metrics.validation_metric}")

    return result
