"""
ingest-movielens: build the movie similarity graph and the user dataset
from a ratings file and store both.
"""
import logging

import numpy as np

from datagen import baseline_rmse, ingest_movielens, most_rated
from errors import InvalidInputError
from storage import save_dataset, save_graph
from .common import write_outputs
from .config import ExperimentConfig

logger = logging.getLogger(__name__)


def run(config: ExperimentConfig) -> dict:
    movielens = config.movielens
    if not movielens.path:
        raise InvalidInputError("ingest-movielens needs --ratings, movielens.path or EDGELAB_MOVIELENS")
    data = ingest_movielens(movielens.path, movielens.top_k, movielens.target_item, movielens.keep_negative,
                            movielens.test_fraction, seed=config.seed)

    out = config.output_path
    save_graph(data.operator, out / "movie_graph.txt")
    save_dataset(data.split, out / "movielens_dataset.jsonl")

    degrees = np.count_nonzero(data.operator.matrix, axis=1)
    rows = [{"item": item + 1, "ratings": int(data.rating_counts[item]), "degree": int(degrees[item])}
            for item in range(data.n_items)]
    summary = {
        "n_users": data.n_users,
        "n_items": data.n_items,
        "target_item": data.target_item,
        "edges": int(np.count_nonzero(np.triu(data.operator.matrix))),
        "isolated_items": int(np.sum(degrees == 0)),
        "most_rated": most_rated(data.rating_counts),
        "split_sizes": data.split.sizes(),
        "baseline_rmse": baseline_rmse(data.split),
    }
    logger.info(f"[ingest-movielens] {summary['n_users']} users, {summary['n_items']} movies, "
                f"{summary['edges']} edges")
    write_outputs(config, rows, "items.csv", summary=summary)
    return summary
