"""
Dataset generation: synthetic source localization and MovieLens ingestion.
"""
from .schemas import SPLITS, DatasetSplit, LabeledSample, split_indices
from .source_localization import community_sources, diffuse, gen_source_localization
from .movielens import (
    MovieLensData,
    baseline_rmse,
    ingest_movielens,
    most_rated,
    pearson_similarity,
    prune_top_k,
    rating_matrix,
    read_ratings,
)

__all__ = [
    "SPLITS",
    "DatasetSplit",
    "LabeledSample",
    "split_indices",
    "community_sources",
    "diffuse",
    "gen_source_localization",
    "MovieLensData",
    "baseline_rmse",
    "ingest_movielens",
    "most_rated",
    "pearson_similarity",
    "prune_top_k",
    "rating_matrix",
    "read_ratings",
]
