"""
Empirical stability trials: analyze a filter or network, perturb the graph,
measure the output deviation and compare it against the matching bound.
"""
import logging
from typing import Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field
from scipy import stats

from errors import InvalidInputError
from edgenet import EdgeNet
from filters import FilterClass, FilterParams, apply, scale
from graphcore import GraphShiftOperator, SignalLike, signal_values
from perturb import Perturbation, PerturbedGraph, perturb
from spectral import (
    ResponseKind,
    filter_response,
    graph_frequency_pairs,
    lipschitz_constant_graph_specific,
    lipschitz_constant_multivariate,
    lipschitz_constant_univariate,
    misalignment,
    response_bound,
    sample_frequency_pairs,
)
from .constants import StabilityConstants, remainder_warning

logger = logging.getLogger(__name__)

CERTIFY_TOLERANCE = 1e-9
Subject = Union[FilterParams, EdgeNet]


class FilterAnalysis(BaseModel):
    """Spectral quantities of one filter that the bounds need."""
    c_lipschitz: float
    eps_misalign: float
    peak_response: float


class StabilityAnalysis(BaseModel):
    """Constants of a filter or network plus its largest response magnitude."""
    constants: StabilityConstants
    peak_response: float
    layers: int = 1
    features: int = 1
    order: int = 0

    @property
    def certified(self) -> bool:
        return self.peak_response <= 1.0 + CERTIFY_TOLERANCE

    def rescaled(self, factor: float) -> "StabilityAnalysis":
        constants = self.constants.model_copy(update={"c_lipschitz": self.constants.c_lipschitz * factor})
        return self.model_copy(update={"constants": constants, "peak_response": self.peak_response * factor})


class StabilityReport(BaseModel):
    """Outcome of one perturbation trial."""
    class_tag: FilterClass
    n: int
    order: int
    layers: int = 1
    features: int = 1
    pert_size: float = Field(ge=0)
    eps_misalign: float = Field(ge=0)
    c_lipschitz: float = Field(ge=0)
    empirical: float = Field(ge=0)
    bound: float = Field(ge=0)
    signal_norm: float = Field(ge=0)
    deviation_norm: float = Field(default=0.0, ge=0)
    violated: Optional[bool] = None
    bound_applicable: bool = True
    first_order: bool = True
    remainder_warning: bool = False
    rescaled_by: float = 1.0
    seed: Optional[int] = None

    def to_row(self) -> dict:
        return {
            "class": self.class_tag.value,
            "n": self.n,
            "K": self.order,
            "L": self.layers,
            "F": self.features,
            "pert_size": self.pert_size,
            "eps_misalign": self.eps_misalign,
            "C_L": self.c_lipschitz,
            "empirical": self.empirical,
            "bound": self.bound,
            "violated": self.violated,
            "bound_applicable": self.bound_applicable,
            "remainder_warning": self.remainder_warning,
            "rescaled_by": self.rescaled_by,
            "seed": self.seed,
        }


def analyze_filter(
    params: FilterParams,
    operator: GraphShiftOperator,
    grid: int = 2001,
    graph_specific: bool = False,
    rng: Optional[np.random.Generator] = None,
    uniform_pairs: int = 2000,
) -> FilterAnalysis:
    """C_L, misalignment and max |h| of one filter against one graph."""
    response = filter_response(params, operator)
    if response.kind is ResponseKind.MULTIVARIATE:
        rng = rng or np.random.default_rng(0)
        if response.order == 0:
            c_lipschitz = 0.0
            peak = float(np.max(np.abs(response.coefficients)))
        else:
            points = graph_frequency_pairs(params, operator, rng)
            first, second = sample_frequency_pairs(response.order, rng, uniform_pairs, points)
            c_lipschitz = lipschitz_constant_multivariate(response, first, second)
            peak = response_bound(response, points=np.concatenate([first, second]))
        eps = max(misalignment(operator.eigenvectors, params.eigenpair(k).vectors, match=True).epsilon
                  for k in range(params.order + 1))
        return FilterAnalysis(c_lipschitz=c_lipschitz, eps_misalign=eps, peak_response=peak)

    if graph_specific and params.class_tag in (FilterClass.CONVOLUTIONAL, FilterClass.SHIFT_INVARIANT):
        c_lipschitz = lipschitz_constant_graph_specific(response, operator.eigenvalues)
    else:
        c_lipschitz = lipschitz_constant_univariate(response, grid=grid)
    peak = response_bound(response, grid=grid)
    eps = 0.0
    if params.class_tag in (FilterClass.EIGENVECTOR_SHARING, FilterClass.NODE_VARYING):
        eps = misalignment(operator.eigenvectors, params.eigenpair(0).vectors, match=True).epsilon
    return FilterAnalysis(c_lipschitz=c_lipschitz, eps_misalign=eps, peak_response=peak)


def network_constants(net: EdgeNet, operator: Optional[GraphShiftOperator] = None, grid: int = 2001,
                      graph_specific: bool = False, seed: int = 0) -> StabilityAnalysis:
    """C_L and misalignment maximized over every filter of the network."""
    operator = operator or net.operator
    rng = np.random.default_rng(seed)
    analyses = [analyze_filter(params, operator, grid, graph_specific, rng) for params in net.filters()]
    constants = StabilityConstants(
        c_lipschitz=max(a.c_lipschitz for a in analyses),
        n=operator.n,
        eps_misalign=max(a.eps_misalign for a in analyses),
        class_tag=net.parameterization.class_tag,
    )
    return StabilityAnalysis(
        constants=constants,
        peak_response=max(a.peak_response for a in analyses),
        layers=net.config.layers,
        features=net.config.features,
        order=net.config.order,
    )


def analyze(subject: Subject, operator: GraphShiftOperator, grid: int = 2001,
            graph_specific: bool = False, seed: int = 0) -> StabilityAnalysis:
    if isinstance(subject, EdgeNet):
        return network_constants(subject, operator, grid, graph_specific, seed)
    result = analyze_filter(subject, operator, grid, graph_specific, np.random.default_rng(seed))
    constants = StabilityConstants(c_lipschitz=result.c_lipschitz, n=operator.n,
                                   eps_misalign=result.eps_misalign, class_tag=subject.class_tag)
    return StabilityAnalysis(constants=constants, peak_response=result.peak_response, order=subject.order)


def _deviation(subject: Subject, operator: GraphShiftOperator, perturbed: GraphShiftOperator,
               x: np.ndarray) -> float:
    if isinstance(subject, EdgeNet):
        difference = subject.embed(x, operator)[0] - subject.embed(x, perturbed)[0]
        # largest per-feature deviation
        return float(np.max(np.linalg.norm(difference, axis=-1)))
    difference = apply(subject, operator, x).values - apply(subject, perturbed, x).values
    return float(np.linalg.norm(difference))


def evaluate_trial(
    subject: Subject,
    operator: GraphShiftOperator,
    perturbation: Perturbation,
    x: SignalLike,
    analysis: Optional[StabilityAnalysis] = None,
    grid: int = 2001,
    graph_specific: bool = False,
    certify: bool = True,
    remainder_threshold: float = 0.1,
    first_order_limit: float = 0.05,
    perturbed: Optional[PerturbedGraph] = None,
) -> StabilityReport:
    """
    Compare the empirical output deviation under one perturbation with the
    first-order bound of the subject's class.

    Args:
        subject: a filter or an EdgeNet
        operator: unperturbed graph
        perturbation: relative perturbation E
        x: input signal
        analysis: precomputed constants; computed here when omitted
        certify: rescale a subject with max |h| > 1 instead of flagging it
        perturbed: the already perturbed graph, reused across paired trials

    Returns:
        StabilityReport; violated is None when the bound does not apply
    """
    values = signal_values(x)
    if values.shape[-1] != operator.n:
        raise InvalidInputError(f"Signal has {values.shape[-1]} entries, graph has {operator.n} nodes")
    analysis = analysis or analyze(subject, operator, grid, graph_specific)

    rescaled_by = 1.0
    applicable = analysis.certified
    if not applicable and certify:
        rescaled_by = 1.0 / analysis.peak_response
        subject = subject.rescaled(rescaled_by) if isinstance(subject, EdgeNet) else scale(subject, rescaled_by)
        analysis = analysis.rescaled(rescaled_by)
        applicable = True

    if perturbed is None:
        perturbed = perturb(operator, perturbation)
    empirical = _deviation(subject, operator, perturbed.operator, values)
    signal_norm = float(np.linalg.norm(values))
    constants = analysis.constants
    bound = constants.bound(signal_norm, perturbation.size, analysis.layers, analysis.features)

    violated = None
    if applicable:
        violated = bool(empirical > bound * (1.0 + 1e-9) + 1e-14)
        if violated and perturbation.size <= first_order_limit:
            logger.warning(f"[bounds] {constants.class_tag.value} violation: empirical={empirical:.3e} bound={bound:.3e}")

    return StabilityReport(
        class_tag=constants.class_tag,
        n=operator.n,
        order=analysis.order,
        layers=analysis.layers,
        features=analysis.features,
        pert_size=perturbation.size,
        eps_misalign=constants.eps_misalign,
        c_lipschitz=constants.c_lipschitz,
        empirical=empirical,
        bound=bound,
        signal_norm=signal_norm,
        deviation_norm=perturbed.deviation_norm,
        violated=violated,
        bound_applicable=applicable,
        first_order=perturbation.size <= first_order_limit,
        remainder_warning=remainder_warning(perturbation.size, constants.eps_misalign, remainder_threshold),
        rescaled_by=rescaled_by,
        seed=perturbation.seed,
    )


class ScalingFit(BaseModel):
    slope: float
    r_squared: float


def scaling_fit(sizes: Sequence[float], deviations: Sequence[float]) -> ScalingFit:
    """Least-squares line through the origin and its uncentered R^2."""
    sizes = np.asarray(sizes, dtype=float)
    deviations = np.asarray(deviations, dtype=float)
    if sizes.shape != deviations.shape or sizes.size == 0:
        raise InvalidInputError("sizes and deviations must be non-empty and of equal length")
    denominator = float(np.dot(sizes, sizes))
    slope = float(np.dot(sizes, deviations) / denominator) if denominator else 0.0
    total = float(np.dot(deviations, deviations))
    if total == 0.0:
        return ScalingFit(slope=slope, r_squared=1.0)
    residual = float(np.sum((deviations - slope * sizes) ** 2))
    return ScalingFit(slope=slope, r_squared=1.0 - residual / total)


class SignTest(BaseModel):
    wins: int
    losses: int
    p_value: float


def ordering_sign_test(smaller: Sequence[float], larger: Sequence[float]) -> SignTest:
    """
    Paired one-sided sign test of smaller < larger; ties are dropped.
    """
    smaller = np.asarray(smaller, dtype=float)
    larger = np.asarray(larger, dtype=float)
    if smaller.shape != larger.shape:
        raise InvalidInputError("Paired samples must have equal length")
    wins = int(np.sum(smaller < larger))
    losses = int(np.sum(smaller > larger))
    if wins + losses == 0:
        return SignTest(wins=0, losses=0, p_value=1.0)
    p_value = stats.binomtest(wins, wins + losses, 0.5, alternative="greater").pvalue
    return SignTest(wins=wins, losses=losses, p_value=float(p_value))
