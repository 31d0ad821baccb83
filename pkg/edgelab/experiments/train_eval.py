"""
train-eval: train every filter class and score it on perturbed graphs.

Source localization trains classifiers on fresh SBM realizations; MovieLens
mode regresses the target movie's rating at its node and reports RMSE next
to the global-mean baseline.
"""
import logging
import math
from collections import defaultdict

import numpy as np
from scipy import stats

from datagen import baseline_rmse, gen_source_localization, ingest_movielens
from edgenet import EdgeNet, evaluate, train
from errors import InvalidInputError
from filters import FilterClass
from perturb import perturb, sample_perturbation
from storage import write_csv
from .common import build_graph, net_config, parse_classes, task_seed, training_config, write_outputs
from .config import ExperimentConfig
from .parallel import run_tasks

logger = logging.getLogger(__name__)

# Parameterizations whose size grows with n^2 or worse do not fit the movie graph
MOVIELENS_UNSUPPORTED = (FilterClass.SHIFT_INVARIANT, FilterClass.GENERAL)


def load_task(config: ExperimentConfig, realization: int, split: int):
    """(operator, dataset, task, outputs, net overrides) of one grid point."""
    if config.train.task == "movielens":
        movielens = config.movielens
        if not movielens.path:
            raise InvalidInputError("MovieLens mode needs movielens.path or EDGELAB_MOVIELENS")
        data = ingest_movielens(movielens.path, movielens.top_k, movielens.target_item, movielens.keep_negative,
                                movielens.test_fraction, seed=task_seed(config.seed, 13, realization, split))
        overrides = {"readout": "node", "target_node": data.target_node}
        return data.operator, data.split, "regression", 1, overrides
    operator = build_graph(config, task_seed(config.seed, 10, realization))
    dataset = gen_source_localization(operator, config.train.sizes, config.train.t_max, config.train.noise_std,
                                      seed=task_seed(config.seed, 11, realization, split))
    return operator, dataset, "classification", dataset.params["classes"], {}


def train_class(config: ExperimentConfig, operator, dataset, task: str, outputs: int, class_tag: FilterClass,
                seed: int, **overrides) -> tuple[EdgeNet, float]:
    """Train one network; returns it with its final training loss."""
    net = EdgeNet(net_config(config, class_tag, outputs, seed, **overrides), operator)
    validation = dataset.arrays("validation")
    result = train(net, dataset.arrays("train"), training_config(config, task, seed),
                   validation_data=validation if len(validation[0]) else None)
    final_loss = result.losses()[-1] if result.history else float("nan")
    return net, final_loss


def perturbed_metrics(config: ExperimentConfig, net: EdgeNet, operator, signals, targets, task: str,
                      pert_sizes: list[float], realization: int, split: int) -> list[tuple[float, float]]:
    scores = []
    for index, size in enumerate(pert_sizes):
        perturbation = sample_perturbation(operator.n, size, config.train.mode,
                                           task_seed(config.seed, 12, realization, split, index), operator=operator)
        perturbed = perturb(operator, perturbation)
        scores.append((size, evaluate(net, signals, targets, task, perturbed.operator)))
    return scores


def run_grid_point(task_spec: tuple) -> list[dict]:
    config, realization, split = task_spec
    operator, dataset, task, outputs, overrides = load_task(config, realization, split)
    metric_name = "accuracy" if task == "classification" else "rmse"
    signals, targets = dataset.arrays("test")
    rows = []
    for class_tag in selected_classes(config):
        seed = task_seed(config.seed, 14, realization, split)
        net, final_loss = train_class(config, operator, dataset, task, outputs, class_tag, seed, **overrides)
        for size, metric in perturbed_metrics(config, net, operator, signals, targets, task,
                                              config.train.pert_sizes, realization, split):
            rows.append({
                "class": class_tag.value,
                "realization": realization,
                "split": split,
                "pert_size": size,
                "metric": metric,
                "metric_name": metric_name,
                "n_params": net.count_parameters(),
                "final_loss": final_loss,
            })
        logger.info(f"[train-eval] r={realization} s={split} {class_tag.value}: final loss {final_loss:.4f}")
    if task == "regression":
        rows.append({"class": "baseline", "realization": realization, "split": split, "pert_size": 0.0,
                     "metric": baseline_rmse(dataset), "metric_name": metric_name, "n_params": 1,
                     "final_loss": float("nan")})
    return rows


def selected_classes(config: ExperimentConfig) -> list[FilterClass]:
    classes = parse_classes(config.train.classes)
    if config.train.task == "movielens":
        dropped = [tag.value for tag in classes if tag in MOVIELENS_UNSUPPORTED]
        if dropped:
            logger.warning(f"[train-eval] skipping {dropped} on the movie graph")
        classes = [tag for tag in classes if tag not in MOVIELENS_UNSUPPORTED]
    if not classes:
        raise InvalidInputError("No filter class left to train")
    return classes


# ============ Aggregation ============

def _mean_std(values: list[float]) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    std = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return float(values.mean()), std


def aggregate(rows: list[dict], over: str) -> list[dict]:
    """
    Mean +- std per (class, pert_size) across `over` ("realization" or
    "split"), after averaging the other axis.
    """
    other = "split" if over == "realization" else "realization"
    cells = defaultdict(lambda: defaultdict(list))
    for row in rows:
        cells[row["class"], row["pert_size"]][row[over]].append(row["metric"])
    table = []
    for (class_name, size), groups in sorted(cells.items()):
        means = [float(np.mean(values)) for _, values in sorted(groups.items())]
        mean, std = _mean_std(means)
        table.append({"class": class_name, "pert_size": size, "over": over, "averaged": other,
                      "mean": mean, "std": std, "count": len(means)})
    return table


def trend_summary(rows: list[dict]) -> dict:
    """Spearman rho of metric against perturbation size per run, averaged per class."""
    series = defaultdict(list)
    for row in rows:
        if row["class"] != "baseline":
            series[row["class"], row["realization"], row["split"]].append((row["pert_size"], row["metric"]))
    rhos = defaultdict(list)
    for (class_name, _, _), points in series.items():
        sizes, metrics = zip(*sorted(points))
        if len(set(sizes)) < 2 or len(set(metrics)) < 2:
            continue
        rho = stats.spearmanr(sizes, metrics).statistic
        if not math.isnan(rho):
            rhos[class_name].append(float(rho))
    return {class_name: {"mean_rho": float(np.mean(values)), "runs": len(values)}
            for class_name, values in rhos.items()}


def run(config: ExperimentConfig) -> dict:
    train_section = config.train
    selected_classes(config)
    tasks = [(config, realization, split)
             for realization in range(train_section.realizations) for split in range(train_section.splits)]
    rows = [row for part in run_tasks(run_grid_point, tasks, config.threads, "train-eval", config.quiet)
            for row in part]

    summary_rows = aggregate(rows, "realization") + aggregate(rows, "split")
    summary = {
        "task": train_section.task,
        "metric": rows[0]["metric_name"] if rows else None,
        "trend": trend_summary(rows),
        "aggregates": summary_rows,
    }
    write_csv(summary_rows, config.output_path / "train_eval_summary.csv", f"{config.command}-summary")
    write_outputs(config, rows, "train_eval.csv", "train-eval", summary)
    return summary
