"""
Dataset records shared by the generators and the storage layer.
"""
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np

from errors import InvalidInputError

SPLITS = ("train", "validation", "test")


@dataclass
class LabeledSample:
    """One graph signal with its label (class index or regression target)."""
    signal: np.ndarray
    label: Union[int, float]
    meta: dict = field(default_factory=dict)

    def has_label(self) -> bool:
        return not (isinstance(self.label, float) and np.isnan(self.label))


@dataclass
class DatasetSplit:
    """Disjoint train, validation and test samples plus generation parameters."""
    train: list[LabeledSample]
    validation: list[LabeledSample]
    test: list[LabeledSample]
    seed: int = 0
    kind: str = "custom"
    params: dict[str, Any] = field(default_factory=dict)

    def part(self, name: str) -> list[LabeledSample]:
        if name not in SPLITS:
            raise InvalidInputError(f"Unknown split '{name}'. Available: {list(SPLITS)}")
        return getattr(self, name)

    def sizes(self) -> dict[str, int]:
        return {name: len(self.part(name)) for name in SPLITS}

    def arrays(self, name: str, labeled_only: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """
        Stack one split into (signals, labels).

        Args:
            name: train, validation or test
            labeled_only: drop samples whose label is missing (NaN)
        """
        samples = self.part(name)
        if labeled_only:
            samples = [sample for sample in samples if sample.has_label()]
        if not samples:
            return np.zeros((0, 0)), np.zeros(0)
        signals = np.stack([sample.signal for sample in samples])
        labels = np.array([sample.label for sample in samples])
        return signals, labels


def split_indices(count: int, fractions: tuple[float, ...], rng: np.random.Generator) -> list[np.ndarray]:
    """Random disjoint index sets with the given fractions of count."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise InvalidInputError(f"Split fractions must sum to 1, got {fractions}")
    order = rng.permutation(count)
    bounds = np.round(np.cumsum((0.0,) + tuple(fractions)) * count).astype(int)
    return [order[bounds[i]:bounds[i + 1]] for i in range(len(fractions))]
