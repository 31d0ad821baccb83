"""
MovieLens-100K ingestion into a movie similarity graph and a rating
regression task.

Movies are nodes. Edge weights are Pearson correlations over the users who
rated both movies, pruned to each movie's top-k most similar neighbours and
symmetrized. Every user contributes one signal: their ratings with the
target movie zeroed; the label is their rating of the target movie.
"""
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from errors import IngestionError, UnknownTargetError
from graphcore import GraphShiftOperator, from_adjacency
from .schemas import DatasetSplit, LabeledSample, split_indices

logger = logging.getLogger(__name__)

RATING_COLUMNS = ["user", "item", "rating", "timestamp"]
MIN_CORATERS = 2
VARIANCE_FLOOR = 1e-9


@dataclass
class MovieLensData:
    operator: GraphShiftOperator
    split: DatasetSplit
    target_item: int
    similarity: np.ndarray
    rating_counts: np.ndarray

    @property
    def target_node(self) -> int:
        return self.target_item - 1

    @property
    def n_users(self) -> int:
        return len(self.split.train) + len(self.split.validation) + len(self.split.test)

    @property
    def n_items(self) -> int:
        return self.operator.n


def read_ratings(path: Union[str, Path]) -> pd.DataFrame:
    """
    Parse a tab-separated `user item rating timestamp` file.

    Raises:
        IngestionError: unreadable file or malformed line (with its 1-based number)
    """
    try:
        frame = pd.read_csv(path, sep="\t", header=None, names=RATING_COLUMNS, dtype=str,
                            skip_blank_lines=False, keep_default_na=False)
    except FileNotFoundError:
        raise IngestionError(f"Ratings file not found: {path}")
    except pd.errors.ParserError as exc:
        match = re.search(r"line (\d+)", str(exc))
        raise IngestionError(f"malformed line ({exc})", int(match.group(1)) if match else None)
    except pd.errors.EmptyDataError:
        raise IngestionError(f"Ratings file is empty: {path}")

    parsed = pd.DataFrame({
        "user": pd.to_numeric(frame["user"], errors="coerce"),
        "item": pd.to_numeric(frame["item"], errors="coerce"),
        "rating": pd.to_numeric(frame["rating"], errors="coerce"),
        "timestamp": pd.to_numeric(frame["timestamp"], errors="coerce"),
    })
    valid = parsed.notna().all(axis=1) & (parsed["user"] >= 1) & (parsed["item"] >= 1)
    valid &= (parsed["user"] % 1 == 0) & (parsed["item"] % 1 == 0)
    if not valid.all():
        row = int(np.flatnonzero(~valid.to_numpy())[0])
        raise IngestionError(f"expected 'user item rating timestamp', got {frame.iloc[row].tolist()}", row + 1)

    parsed["user"] = parsed["user"].astype(int)
    parsed["item"] = parsed["item"].astype(int)
    return parsed


def rating_matrix(ratings: pd.DataFrame) -> tuple[np.ndarray, np.ndarray]:
    """Dense users x items ratings (0 where unrated) and the rated mask."""
    n_users = int(ratings["user"].max())
    n_items = int(ratings["item"].max())
    values = np.zeros((n_users, n_items))
    mask = np.zeros((n_users, n_items), dtype=bool)
    # a repeated (user, item) pair keeps its last rating
    users = ratings["user"].to_numpy() - 1
    items = ratings["item"].to_numpy() - 1
    values[users, items] = ratings["rating"].to_numpy(dtype=float)
    mask[users, items] = True
    return values, mask


def pearson_similarity(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """
    Item-item Pearson correlation over co-rating users.

    Pairs with fewer than two co-raters, or with constant ratings over the
    co-raters, get similarity 0. The diagonal is 0.
    """
    rated = mask.astype(float)
    values = values * rated
    counts = rated.T @ rated
    sums = values.T @ rated
    squares = (values ** 2).T @ rated
    products = values.T @ values

    safe_counts = np.where(counts > 0, counts, 1.0)
    covariance = products - sums * sums.T / safe_counts
    variance_a = squares - sums ** 2 / safe_counts
    variance_b = variance_a.T
    defined = (counts >= MIN_CORATERS) & (variance_a > VARIANCE_FLOOR) & (variance_b > VARIANCE_FLOOR)
    denominator = np.sqrt(np.where(defined, variance_a * variance_b, 1.0))
    similarity = np.where(defined, covariance / denominator, 0.0)
    similarity = np.clip(0.5 * (similarity + similarity.T), -1.0, 1.0)
    np.fill_diagonal(similarity, 0.0)
    return similarity


def prune_top_k(similarity: np.ndarray, top_k: int = 10, keep_negative: bool = False) -> np.ndarray:
    """
    Keep each node's top_k strongest neighbours; an edge survives when either
    endpoint selected it.

    Args:
        similarity: symmetric similarity matrix
        top_k: selections per node
        keep_negative: use |similarity| instead of dropping negative values
    """
    weights = np.abs(similarity) if keep_negative else np.where(similarity > 0, similarity, 0.0)
    n = weights.shape[0]
    selected = np.zeros((n, n), dtype=bool)
    index = np.arange(n)
    for node in range(n):
        row = weights[node]
        candidates = np.flatnonzero(row > 0)
        if candidates.size == 0:
            continue
        # strongest first, ties by smallest index
        ranked = candidates[np.lexsort((index[candidates], -row[candidates]))]
        selected[node, ranked[:top_k]] = True
    edges = selected | selected.T
    return np.where(edges, weights, 0.0)


def most_rated(counts: np.ndarray, limit: int = 5) -> list[int]:
    order = np.lexsort((np.arange(counts.size), -counts))
    return [int(item) + 1 for item in order[:limit]]


def ingest_movielens(
    path: Union[str, Path],
    top_k: int = 10,
    target_item: Optional[int] = None,
    keep_negative: bool = False,
    test_fraction: float = 0.1,
    seed: int = 0,
) -> MovieLensData:
    """
    Build the movie graph and the user-signal dataset from a ratings file.

    Args:
        path: MovieLens `u.data` style file
        top_k: neighbours kept per movie before symmetrization
        target_item: 1-based movie id to predict; defaults to the most rated movie
        keep_negative: keep negative correlations as |weight| instead of dropping them
        test_fraction: share of users held out for testing
        seed: split seed

    Raises:
        IngestionError: malformed input
        UnknownTargetError: target movie missing or never rated
    """
    ratings = read_ratings(path)
    values, mask = rating_matrix(ratings)
    counts = mask.sum(axis=0)
    if target_item is None:
        target_item = most_rated(counts, 1)[0]
    if not 1 <= target_item <= counts.size or counts[target_item - 1] == 0:
        raise UnknownTargetError(target_item, most_rated(counts))
    target = target_item - 1

    similarity = pearson_similarity(values, mask)
    adjacency = prune_top_k(similarity, top_k, keep_negative)
    operator = from_adjacency(adjacency, normalize=True, name="movielens")

    samples = []
    for user in range(values.shape[0]):
        signal = values[user].copy()
        signal[target] = 0.0
        label = float(values[user, target]) if mask[user, target] else float("nan")
        samples.append(LabeledSample(signal=signal, label=label, meta={"user": user + 1}))

    rng = np.random.default_rng(seed)
    train_index, test_index = split_indices(len(samples), (1.0 - test_fraction, test_fraction), rng)
    split = DatasetSplit(
        train=[samples[i] for i in sorted(train_index)],
        validation=[],
        test=[samples[i] for i in sorted(test_index)],
        seed=seed,
        kind="movielens",
        params={
            "path": str(path),
            "top_k": top_k,
            "target_item": int(target_item),
            "keep_negative": keep_negative,
            "test_fraction": test_fraction,
            "n_users": int(values.shape[0]),
            "n_items": int(values.shape[1]),
        },
    )
    logger.info(f"[movielens] {values.shape[0]} users, {values.shape[1]} movies, target={target_item}, "
                f"edges={int(np.count_nonzero(np.triu(adjacency)))}")
    return MovieLensData(operator=operator, split=split, target_item=int(target_item),
                         similarity=similarity, rating_counts=counts)


def baseline_rmse(split: DatasetSplit) -> float:
    """RMSE on the test split of predicting the mean training target rating."""
    _, train_labels = split.arrays("train")
    _, test_labels = split.arrays("test")
    if train_labels.size == 0 or test_labels.size == 0:
        return float("nan")
    return float(np.sqrt(np.mean((test_labels - train_labels.mean()) ** 2)))
