"""
Random and deterministic graph generators.

Every generator draws an adjacency with networkx, rejects disconnected
draws and divides the result by its spectral radius so the shift operator
has unit spectral norm.
"""
import logging
import os
from abc import ABC, abstractmethod
from typing import Optional

import networkx as nx
import numpy as np

from errors import DisconnectedGraphError, InvalidInputError
from .operator import GraphShiftOperator, _frozen, support_mask

logger = logging.getLogger(__name__)

DEFAULT_RETRIES = 50


def default_retries() -> int:
    return int(os.getenv("EDGELAB_SBM_RETRIES", DEFAULT_RETRIES))


def attempt_seeds(seed: int, retries: int) -> list[int]:
    """Deterministic per-attempt seeds derived from one user seed."""
    children = np.random.SeedSequence(seed).spawn(retries)
    return [int(child.generate_state(1)[0]) for child in children]


def normalize_by_spectral_radius(
    adjacency: np.ndarray,
    communities: Optional[np.ndarray] = None,
    name: str = "custom",
) -> GraphShiftOperator:
    """Build an operator from a symmetric adjacency scaled to unit spectral norm."""
    operator = GraphShiftOperator.from_matrix(adjacency, communities=communities, name=name)
    radius = operator.spectral_radius
    if radius == 0:
        return operator
    # Reuse the decomposition; scaling leaves the eigenvectors untouched.
    matrix = operator.matrix / radius
    return GraphShiftOperator(
        matrix=_frozen(matrix),
        eigenvalues=_frozen(operator.eigenvalues / radius),
        eigenvectors=operator.eigenvectors,
        support=support_mask(matrix),
        communities=operator.communities,
        name=name,
    )


class GraphGenerator(ABC):
    """Base class for graph generators."""

    @property
    @abstractmethod
    def name(self) -> str:
        """Generator name."""
        pass

    @abstractmethod
    def sample(self, seed: int) -> nx.Graph:
        """Draw one candidate graph."""
        pass

    def communities(self) -> Optional[np.ndarray]:
        return None

    def build(self, seed: int = 0, retries: Optional[int] = None) -> GraphShiftOperator:
        """
        Draw graphs until one is connected, then normalize it.

        Raises:
            DisconnectedGraphError: no connected draw within the retry budget
        """
        retries = default_retries() if retries is None else retries
        if retries < 1:
            raise InvalidInputError(f"retries must be >= 1, got {retries}")

        for attempt, attempt_seed in enumerate(attempt_seeds(seed, retries)):
            graph = self.sample(attempt_seed)
            if graph.number_of_nodes() == 1 or nx.is_connected(graph):
                if attempt:
                    logger.debug(f"[graph] {self.name}: connected after {attempt + 1} draws")
                adjacency = nx.to_numpy_array(graph, nodelist=range(graph.number_of_nodes()))
                return normalize_by_spectral_radius(adjacency, self.communities(), self.name)

        raise DisconnectedGraphError(self.name, retries)


def _check_probability(label: str, value: float):
    if not 0.0 <= value <= 1.0:
        raise InvalidInputError(f"{label} must lie in [0, 1], got {value}")


def _check_nodes(n: int):
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")


class SBMGenerator(GraphGenerator):
    """Stochastic block model with equal-size communities."""

    def __init__(self, n: int = 100, communities: int = 10, p_intra: float = 0.8, p_inter: float = 0.2):
        _check_nodes(n)
        if communities < 1 or n % communities:
            raise InvalidInputError(f"n={n} is not divisible into {communities} communities")
        _check_probability("p_intra", p_intra)
        _check_probability("p_inter", p_inter)
        self.n = n
        self.num_communities = communities
        self.p_intra = p_intra
        self.p_inter = p_inter

    @property
    def name(self) -> str:
        return "sbm"

    def sample(self, seed: int) -> nx.Graph:
        size = self.n // self.num_communities
        sizes = [size] * self.num_communities
        probs = [
            [self.p_intra if a == b else self.p_inter for b in range(self.num_communities)]
            for a in range(self.num_communities)
        ]
        return nx.stochastic_block_model(sizes, probs, seed=seed)

    def communities(self) -> np.ndarray:
        return np.arange(self.n) // (self.n // self.num_communities)


class ErdosRenyiGenerator(GraphGenerator):
    """G(n, p) random graph."""

    def __init__(self, n: int = 100, p: float = 0.3):
        _check_nodes(n)
        _check_probability("p", p)
        self.n = n
        self.p = p

    @property
    def name(self) -> str:
        return "erdos_renyi"

    def sample(self, seed: int) -> nx.Graph:
        return nx.erdos_renyi_graph(self.n, self.p, seed=seed)


class CompleteGenerator(GraphGenerator):
    def __init__(self, n: int = 10):
        _check_nodes(n)
        self.n = n

    @property
    def name(self) -> str:
        return "complete"

    def sample(self, seed: int) -> nx.Graph:
        return nx.complete_graph(self.n)


class PathGenerator(GraphGenerator):
    def __init__(self, n: int = 10):
        _check_nodes(n)
        self.n = n

    @property
    def name(self) -> str:
        return "path"

    def sample(self, seed: int) -> nx.Graph:
        return nx.path_graph(self.n)


# Registry of available generators
_generators: dict[str, type[GraphGenerator]] = {}


def register_generator(name: str, generator_class: type[GraphGenerator]):
    """Register a graph generator class."""
    _generators[name] = generator_class


def get_generator(name: Optional[str] = None, **kwargs) -> GraphGenerator:
    """
    Get a generator instance.
    If name is None, uses EDGELAB_GENERATOR env var or defaults to 'sbm'.
    """
    if name is None:
        name = os.getenv("EDGELAB_GENERATOR", "sbm")

    if name not in _generators:
        available = list(_generators.keys())
        raise InvalidInputError(f"Unknown generator '{name}'. Available: {available}")

    return _generators[name](**kwargs)


def list_generators() -> list[str]:
    return list(_generators.keys())


register_generator("sbm", SBMGenerator)
register_generator("erdos_renyi", ErdosRenyiGenerator)
register_generator("complete", CompleteGenerator)
register_generator("path", PathGenerator)


def build_sbm(
    n: int,
    communities: int,
    p_intra: float,
    p_inter: float,
    seed: int = 0,
    retries: Optional[int] = None,
) -> GraphShiftOperator:
    """Connected SBM operator normalized to unit spectral norm."""
    return SBMGenerator(n, communities, p_intra, p_inter).build(seed, retries)


def build_erdos_renyi(n: int, p: float, seed: int = 0, retries: Optional[int] = None) -> GraphShiftOperator:
    return ErdosRenyiGenerator(n, p).build(seed, retries)


def build_complete(n: int) -> GraphShiftOperator:
    return CompleteGenerator(n).build(0, 1)


def build_path(n: int) -> GraphShiftOperator:
    return PathGenerator(n).build(0, 1)


def from_adjacency(adjacency: np.ndarray, normalize: bool = True,
                   communities: Optional[np.ndarray] = None, name: str = "custom") -> GraphShiftOperator:
    """Wrap a user-supplied symmetric adjacency, optionally normalizing it."""
    adjacency = np.asarray(adjacency, dtype=float)
    if normalize:
        return normalize_by_spectral_radius(adjacency, communities, name)
    return GraphShiftOperator.from_matrix(adjacency, communities=communities, name=name)


def permute(operator: GraphShiftOperator, permutation: np.ndarray) -> GraphShiftOperator:
    """Relabel nodes: new node a is old node permutation[a]."""
    permutation = np.asarray(permutation, dtype=int)
    if sorted(permutation.tolist()) != list(range(operator.n)):
        raise InvalidInputError("permutation must be a rearrangement of range(n)")
    matrix = operator.matrix[np.ix_(permutation, permutation)]
    communities = None if operator.communities is None else operator.communities[permutation]
    return GraphShiftOperator.from_matrix(matrix, communities=communities, name=operator.name)
