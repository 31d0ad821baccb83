"""
Source-localization dataset: a Kronecker delta at one community's source
node diffused for t steps, plus Gaussian noise; the label is the community.
"""
import logging
from typing import Sequence

import numpy as np

from errors import InvalidInputError
from graphcore import GraphShiftOperator
from .schemas import SPLITS, DatasetSplit, LabeledSample

logger = logging.getLogger(__name__)


def community_sources(operator: GraphShiftOperator) -> np.ndarray:
    """Highest-degree node of every community, ties broken by smallest index."""
    if operator.communities is None:
        raise InvalidInputError("Source localization needs an operator with community assignments")
    degrees = operator.degrees()
    sources = []
    for community in np.unique(operator.communities):
        members = np.flatnonzero(operator.communities == community)
        sources.append(int(members[np.argmax(degrees[members])]))
    return np.array(sources)


def diffuse(operator: GraphShiftOperator, source: int, t: int) -> np.ndarray:
    """S^t e_source by repeated shifts."""
    delta = np.zeros(operator.n)
    delta[source] = 1.0
    return operator.power_apply(delta, t)


def gen_source_localization(
    operator: GraphShiftOperator,
    sizes: Sequence[int] = (5000, 250, 250),
    t_max: int = 20,
    noise_std: float = 1e-2,
    seed: int = 0,
) -> DatasetSplit:
    """
    Draw labeled diffusion samples.

    Args:
        operator: graph with community assignments
        sizes: (train, validation, test) sample counts
        t_max: diffusion times are uniform on 1..t_max
        noise_std: standard deviation of the additive Gaussian noise
        seed: RNG seed

    Returns:
        DatasetSplit whose params record the source node of every community
    """
    if t_max < 1:
        raise InvalidInputError(f"t_max must be >= 1, got {t_max}")
    if noise_std < 0:
        raise InvalidInputError(f"noise_std must be >= 0, got {noise_std}")
    if len(sizes) != 3 or min(sizes) < 0:
        raise InvalidInputError(f"sizes must be three counts >= 0, got {sizes}")

    sources = community_sources(operator)
    rng = np.random.default_rng(seed)
    # every (community, t) diffusion is computed once
    diffusions = {}

    parts = {}
    for name, count in zip(SPLITS, sizes):
        communities = rng.integers(0, len(sources), size=count)
        times = rng.integers(1, t_max + 1, size=count)
        noise = rng.normal(0.0, noise_std, size=(count, operator.n)) if noise_std else np.zeros((count, operator.n))
        samples = []
        for community, t, noise_row in zip(communities, times, noise):
            key = (int(community), int(t))
            if key not in diffusions:
                diffusions[key] = diffuse(operator, sources[community], int(t))
            samples.append(LabeledSample(
                signal=diffusions[key] + noise_row,
                label=int(community),
                meta={"t": int(t), "source": int(sources[community])},
            ))
        parts[name] = samples

    logger.debug(f"[datagen] source localization sizes={list(sizes)} communities={len(sources)}")
    return DatasetSplit(
        train=parts["train"],
        validation=parts["validation"],
        test=parts["test"],
        seed=seed,
        kind="source_localization",
        params={
            "n": operator.n,
            "sizes": list(sizes),
            "t_max": t_max,
            "noise_std": noise_std,
            "sources": sources.tolist(),
            "classes": int(len(sources)),
        },
    )
