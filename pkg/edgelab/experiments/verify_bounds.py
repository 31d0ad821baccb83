"""
verify-bounds: Monte-Carlo check of the first-order stability bounds.

Filter banks of the three classes share the same random eigenvalues and
differ only in their eigenbases, which are Givens rotations of the graph's
eigenvectors by arcsin(eps). Every (perturbation, seed) pair is reused
across classes and misalignment levels so comparisons are paired.
"""
import logging
import math
from collections import defaultdict

import numpy as np

from bounds import StabilityAnalysis, evaluate_trial, network_constants, ordering_sign_test, scaling_fit
from edgenet import EdgeNet
from errors import BoundViolationError, InvalidInputError
from filters import FilterClass, FilterParams, make_edge_from_eigenbases, make_es_params, make_spectral_si
from graphcore import GraphShiftOperator
from perturb import perturb, sample_perturbation
from spectral import disjoint_planes, misalignment, rotate_basis
from .common import build_graph, net_config, parse_classes, task_seed, write_outputs
from .config import ExperimentConfig
from .parallel import run_tasks

logger = logging.getLogger(__name__)

SUPPORTED = (FilterClass.SHIFT_INVARIANT, FilterClass.EIGENVECTOR_SHARING, FilterClass.GENERAL)
ORDERING = (FilterClass.SHIFT_INVARIANT, FilterClass.EIGENVECTOR_SHARING, FilterClass.GENERAL)


# ============ Bank Construction ============

def random_eigenvalues(rng: np.random.Generator, order: int, n: int) -> np.ndarray:
    """phi of shape (K+1, n) with sum_k |phi_i^(k)| = 1, so |h_i| <= 1 on [-1, 1]."""
    phi = rng.uniform(-1.0, 1.0, size=(order + 1, n))
    return phi / np.sum(np.abs(phi), axis=0)


def rotated_bases(operator: GraphShiftOperator, eps: float, order: int) -> list[np.ndarray]:
    """
    One eigenbasis per order, each rotating its own block of column pairs.

    Every basis has misalignment eps with the graph's eigenvectors; the
    k = 0 basis is the one shared by the eigenvector-sharing bank.
    """
    n = operator.n
    theta = math.asin(eps)
    pairs = max(1, n // 2)
    block = max(1, n // (2 * (order + 1)))
    return [rotate_basis(operator.eigenvectors, theta, disjoint_planes(n, block, (k * block) % pairs))
            for k in range(order + 1)]


def make_bank_filter(class_tag: FilterClass, operator: GraphShiftOperator, bases: list[np.ndarray],
                     phi: np.ndarray) -> FilterParams:
    """
    One filter of the bank with eigenvalues phi.

    The shift-invariant entry is V diag(phi^(k)) V^T with V the graph
    eigenvectors: it commutes with S but is not restricted to the graph
    support.
    """
    if class_tag is FilterClass.SHIFT_INVARIANT:
        return make_spectral_si(operator, phi)
    if class_tag is FilterClass.EIGENVECTOR_SHARING:
        return make_es_params(bases[0], phi)
    return make_edge_from_eigenbases(bases, phi)


def build_bank_network(config: ExperimentConfig, operator: GraphShiftOperator, class_tag: FilterClass,
                       eps: float, eigenvalues: list[np.ndarray]) -> EdgeNet:
    """Network whose layer l filter (f, g) has eigenvalues eigenvalues[l][f, g]."""
    bases = rotated_bases(operator, eps, config.net.order)
    bank = [[[make_bank_filter(class_tag, operator, bases, layer[f, g]) for g in range(layer.shape[1])]
             for f in range(layer.shape[0])] for layer in eigenvalues]
    architecture = net_config(config, class_tag, 1, config.seed).model_copy(update={"class_tag": class_tag})
    return EdgeNet.from_filter_bank(architecture, operator, bank)


def draw_eigenvalues(config: ExperimentConfig, n: int) -> list[np.ndarray]:
    net = config.net
    rng = np.random.default_rng(task_seed(config.seed, 1))
    layers = []
    for layer in range(net.layers):
        inputs = 1 if layer == 0 else net.features
        layers.append(np.array([[random_eigenvalues(rng, net.order, n) for _ in range(inputs)]
                                for _ in range(net.features)]))
    return layers


def analyze_banks(config: ExperimentConfig, operator: GraphShiftOperator, nets: dict,
                  eigenvalues: list[np.ndarray]) -> dict:
    """
    Constants per (class, eps).

    SI and ES banks share phi, so their C_L is computed once from the
    aligned bank; the ES misalignment is measured on its shared basis.
    """
    verify = config.verify
    analyses = {}
    reference = None
    for (class_tag, eps), net in nets.items():
        if class_tag is FilterClass.GENERAL:
            analyses[class_tag, eps] = network_constants(net, operator, verify.grid, verify.graph_specific,
                                                         task_seed(config.seed, 2))
            continue
        if reference is None:
            aligned = build_bank_network(config, operator, FilterClass.SHIFT_INVARIANT, 0.0, eigenvalues)
            reference = network_constants(aligned, operator, verify.grid, verify.graph_specific)
        eps_measured = 0.0
        if class_tag is FilterClass.EIGENVECTOR_SHARING:
            eps_measured = misalignment(operator.eigenvectors, net.filters()[0].eigenpair(0).vectors,
                                        match=True).epsilon
        constants = reference.constants.model_copy(update={"eps_misalign": eps_measured, "class_tag": class_tag})
        analyses[class_tag, eps] = reference.model_copy(update={"constants": constants})
    return analyses


# ============ Trials ============

def run_seed_chunk(task: tuple) -> list[dict]:
    config, operator, nets, analyses, seeds = task
    verify = config.verify
    rows = []
    for seed in seeds:
        rng = np.random.default_rng(task_seed(config.seed, 3, seed))
        x = rng.normal(size=operator.n)
        x /= np.linalg.norm(x)
        for size_index, size in enumerate(verify.pert_sizes):
            perturbation = sample_perturbation(operator.n, size, verify.mode, task_seed(config.seed, 4, seed, size_index),
                                               operator=operator)
            perturbed = perturb(operator, perturbation)
            for (class_tag, eps), net in nets.items():
                report = evaluate_trial(
                    net, operator, perturbation, x,
                    analysis=analyses[class_tag, eps],
                    grid=verify.grid,
                    remainder_threshold=verify.remainder_threshold,
                    first_order_limit=verify.first_order_limit,
                    perturbed=perturbed,
                )
                row = report.to_row()
                row.update({"eps_target": eps, "trial": seed, "mode": verify.mode})
                rows.append(row)
    return rows


def chunk(items: list, parts: int) -> list[list]:
    parts = max(1, min(parts, len(items)))
    return [items[index::parts] for index in range(parts)]


# ============ Summary ============

def summarize(config: ExperimentConfig, rows: list[dict]) -> dict:
    verify = config.verify
    violated = [row for row in rows if row["violated"]]
    first_order = [row for row in violated if row["pert_size"] <= verify.first_order_limit]
    summary = {
        "trials": len(rows),
        "violations": len(violated),
        "first_order_violations": len(first_order),
        "not_applicable": sum(1 for row in rows if not row["bound_applicable"]),
        "scaling": {},
        "sign_tests": {},
        "bound_ordering": {},
    }

    means = defaultdict(list)
    for row in rows:
        means[row["class"], row["eps_target"], row["pert_size"]].append(row["empirical"])
    fit_sizes = sorted(size for size in set(verify.pert_sizes) if 0 < size <= verify.fit_max_size)
    for class_tag in parse_classes(verify.classes):
        per_eps = {}
        for eps in verify.eps_values:
            if len(fit_sizes) < 2:
                continue
            deviations = [float(np.mean(means[class_tag.value, eps, size])) for size in fit_sizes]
            per_eps[str(eps)] = scaling_fit(fit_sizes, deviations).model_dump()
        summary["scaling"][class_tag.value] = per_eps

    eps = max(verify.eps_values)
    paired = defaultdict(dict)
    bounds = defaultdict(list)
    for row in rows:
        if row["eps_target"] == eps and math.isclose(row["pert_size"], verify.compare_size):
            paired[row["class"]][row["trial"]] = row["empirical"]
            bounds[row["class"]].append(row["bound"])
    present = [tag for tag in ORDERING if tag.value in paired]
    for smaller, larger in zip(present, present[1:]):
        trials = sorted(set(paired[smaller.value]) & set(paired[larger.value]))
        test = ordering_sign_test([paired[smaller.value][t] for t in trials],
                                  [paired[larger.value][t] for t in trials])
        summary["sign_tests"][f"{smaller.value}<{larger.value}"] = test.model_dump()
    mean_bounds = [float(np.mean(bounds[tag.value])) for tag in present]
    summary["bound_ordering"] = {
        "eps_target": eps,
        "pert_size": verify.compare_size,
        "means": dict(zip([tag.value for tag in present], mean_bounds)),
        "ordered": all(a <= b * (1.0 + 1e-12) for a, b in zip(mean_bounds, mean_bounds[1:])),
    }
    return summary


def run(config: ExperimentConfig) -> dict:
    """
    Run the bound-verification sweep and write its outputs.

    Raises:
        BoundViolationError: strict mode and at least one first-order violation
    """
    verify = config.verify
    classes = parse_classes(verify.classes)
    unsupported = [tag.value for tag in classes if tag not in SUPPORTED]
    if unsupported:
        raise InvalidInputError(f"verify-bounds supports {[tag.value for tag in SUPPORTED]}, got {unsupported}")
    for eps in verify.eps_values:
        if not 0.0 <= eps < math.sqrt(0.5):
            raise InvalidInputError(f"eps values must lie in [0, 0.707), got {eps}")

    operator = build_graph(config, config.seed)
    eigenvalues = draw_eigenvalues(config, operator.n)
    nets = {(class_tag, eps): build_bank_network(config, operator, class_tag, eps, eigenvalues)
            for class_tag in classes for eps in verify.eps_values}
    logger.info(f"[verify-bounds] n={operator.n}, {len(nets)} networks, {verify.seeds} seeds, "
                f"{len(verify.pert_sizes)} sizes")
    analyses: dict[tuple, StabilityAnalysis] = analyze_banks(config, operator, nets, eigenvalues)

    seeds = list(range(verify.seeds))
    tasks = [(config, operator, nets, analyses, part) for part in chunk(seeds, 4 * config.threads)]
    rows = [row for part in run_tasks(run_seed_chunk, tasks, config.threads, "verify-bounds", config.quiet)
            for row in part]

    summary = summarize(config, rows)
    write_outputs(config, rows, "verify_bounds.csv", "verify-bounds", summary)
    logger.info(f"[verify-bounds] {summary['violations']} violation(s) over {summary['trials']} trials")
    if config.strict and summary["first_order_violations"]:
        raise BoundViolationError(summary["first_order_violations"])
    return summary
