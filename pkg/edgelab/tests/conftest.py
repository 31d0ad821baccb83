"""
Shared fixtures for the edgelab test suite.

Run with:
    cd edgelab && pytest tests/ -v

Long Monte-Carlo and training runs are skipped unless EDGELAB_SLOW=1;
MovieLens-100K checks need EDGELAB_MOVIELENS pointing at u.data.
"""
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from graphcore import build_sbm

slow = pytest.mark.skipif(os.getenv("EDGELAB_SLOW") != "1", reason="set EDGELAB_SLOW=1 to run")
movielens_100k = pytest.mark.skipif(not os.getenv("EDGELAB_MOVIELENS"),
                                    reason="set EDGELAB_MOVIELENS to the MovieLens-100K u.data path")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_sbm():
    """Connected 12-node SBM with 3 communities, unit spectral norm."""
    return build_sbm(12, 3, 0.8, 0.2, seed=3)


@pytest.fixture(scope="session")
def sbm20():
    return build_sbm(20, 4, 0.8, 0.2, seed=7)


def random_orthonormal(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))


def relative_error(actual: np.ndarray, expected: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(expected)), 1e-300)
    return float(np.linalg.norm(np.asarray(actual) - np.asarray(expected)) / scale)


def write_ratings(path, rows):
    """Write (user, item, rating, timestamp) rows in the u.data tab layout."""
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write("\t".join(str(value) for value in row) + "\n")
    return path
