"""
spectra: frequency responses on the original and perturbed spectrum plus
eigenbasis misalignment reports.
"""
import logging

import numpy as np
import pandas as pd

from filters import (
    FilterClass,
    FilterParams,
    make_convolutional,
    make_edge_from_eigenbases,
    make_es_params,
    make_spectral_si,
)
from graphcore import GraphShiftOperator
from perturb import perturb, sample_perturbation
from spectral import FrequencyResponse, filter_response, misalignment
from storage import save_graph, save_perturbation, write_csv
from .common import build_graph, task_seed, write_outputs
from .config import ExperimentConfig
from .verify_bounds import random_eigenvalues, rotated_bases

logger = logging.getLogger(__name__)

WEYL_SLACK = 1e-10


def inspection_filters(config: ExperimentConfig, operator: GraphShiftOperator) -> dict[str, FilterParams]:
    """Filters whose spectra are inspected; the shift-invariant one commutes with S but ignores the support."""
    order = config.spectra.order
    rng = np.random.default_rng(task_seed(config.seed, 20))
    phi = random_eigenvalues(rng, order, operator.n)
    bases = rotated_bases(operator, config.spectra.eps, order)
    taps = np.zeros(order + 1)
    taps[0] = 1.0
    return {
        "identity": make_convolutional(taps, operator.n),
        "shift_invariant": make_spectral_si(operator, phi),
        "eigenvector_sharing": make_es_params(bases[0], phi),
        "general": make_edge_from_eigenbases(bases, phi),
    }


def responses_at(params: FilterParams, operator: GraphShiftOperator, eigenvalues: np.ndarray) -> np.ndarray:
    """h_i(lam_i) per index; multivariate responses are read on the diagonal (lam, ..., lam)."""
    coefficients = filter_response(params, operator).coefficients
    return FrequencyResponse(coefficients).at_eigenvalues(eigenvalues)


def response_rows(name: str, params: FilterParams, operator: GraphShiftOperator,
                  perturbed: GraphShiftOperator, deviation: float) -> list[dict]:
    original = responses_at(params, operator, operator.eigenvalues)
    shifted = responses_at(params, operator, perturbed.eigenvalues)
    gaps = np.abs(perturbed.eigenvalues - operator.eigenvalues)
    return [{
        "filter": name,
        "class": params.class_tag.value,
        "index": i,
        "lambda": operator.eigenvalues[i],
        "lambda_perturbed": perturbed.eigenvalues[i],
        "response": original[i],
        "response_perturbed": shifted[i],
        "weyl_gap": gaps[i],
        "weyl_bound": deviation,
        "weyl_ok": bool(gaps[i] <= deviation + WEYL_SLACK),
    } for i in range(operator.n)]


def misalignment_rows(filters: dict[str, FilterParams], operator: GraphShiftOperator,
                      perturbed: GraphShiftOperator) -> tuple[list[dict], np.ndarray]:
    graph_report = misalignment(operator.eigenvectors, perturbed.eigenvectors, match=True)
    rows = [{"first": "graph", "second": "perturbed_graph", "order": None,
             "epsilon": graph_report.epsilon, "diag_min": graph_report.diag_min}]
    for name, params in filters.items():
        if params.class_tag in (FilterClass.CONVOLUTIONAL, FilterClass.SHIFT_INVARIANT):
            continue
        # an eigenvector-sharing filter has one basis for every order
        orders = params.order + 1 if params.class_tag is FilterClass.GENERAL else 1
        for k in range(orders):
            vectors = params.eigenpair(k).vectors
            for label, reference in (("graph", operator), ("perturbed_graph", perturbed)):
                report = misalignment(reference.eigenvectors, vectors, match=True)
                rows.append({"first": label, "second": name, "order": k,
                             "epsilon": report.epsilon, "diag_min": report.diag_min})
    return rows, graph_report.cross_matrix


def run(config: ExperimentConfig) -> dict:
    spectra = config.spectra
    operator = build_graph(config, config.seed)
    perturbation = sample_perturbation(operator.n, spectra.pert_size, spectra.mode, task_seed(config.seed, 21),
                                       operator=operator)
    perturbed = perturb(operator, perturbation)
    filters = inspection_filters(config, operator)

    rows = [row for name, params in filters.items()
            for row in response_rows(name, params, operator, perturbed.operator, perturbed.deviation_norm)]
    alignment, cross = misalignment_rows(filters, operator, perturbed.operator)

    out = config.output_path
    write_csv(alignment, out / "misalignment.csv", f"{config.command}-misalignment")
    write_csv(pd.DataFrame(cross).add_prefix("col").to_dict("records"), out / "cross_matrix.csv",
              f"{config.command}-cross")
    save_graph(operator, out / "graph.txt")
    save_perturbation(perturbation, out / "perturbation.txt")

    weyl_failures = sum(1 for row in rows if not row["weyl_ok"])
    summary = {
        "n": operator.n,
        "pert_size": spectra.pert_size,
        "deviation_norm": perturbed.deviation_norm,
        "max_eigenvalue_shift": float(np.max(np.abs(perturbed.operator.eigenvalues - operator.eigenvalues))),
        "weyl_failures": weyl_failures,
        "graph_misalignment": alignment[0]["epsilon"],
    }
    if weyl_failures:
        logger.warning(f"[spectra] {weyl_failures} eigenvalue(s) outside the Weyl interval")
    write_outputs(config, rows, "spectra.csv", "spectra", summary)
    return summary
