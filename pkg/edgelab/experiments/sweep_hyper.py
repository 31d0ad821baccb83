"""
sweep-hyper: accuracy under a fixed perturbation while one architecture
hyperparameter (features, order or layers) varies.
"""
import logging
from collections import defaultdict

import numpy as np

from .common import task_seed, write_outputs
from .config import ExperimentConfig
from .parallel import run_tasks
from .train_eval import load_task, perturbed_metrics, selected_classes, train_class

logger = logging.getLogger(__name__)


def run_sweep_point(task_spec: tuple) -> list[dict]:
    config, value, realization = task_spec
    sweep = config.sweep
    operator, dataset, task, outputs, overrides = load_task(config, realization, 0)
    overrides[sweep.param] = value
    signals, targets = dataset.arrays("test")
    rows = []
    for class_tag in selected_classes(config):
        seed = task_seed(config.seed, 15, realization)
        net, final_loss = train_class(config, operator, dataset, task, outputs, class_tag, seed, **overrides)
        (_, clean), (_, metric) = perturbed_metrics(config, net, operator, signals, targets, task,
                                                    [0.0, sweep.pert_size], realization, 0)
        rows.append({
            "class": class_tag.value,
            "param": sweep.param,
            "value": value,
            "realization": realization,
            "pert_size": sweep.pert_size,
            "metric": metric,
            "clean_metric": clean,
            "metric_name": "accuracy" if task == "classification" else "rmse",
            "n_params": net.count_parameters(),
            "final_loss": final_loss,
        })
    logger.info(f"[sweep-hyper] {sweep.param}={value} r={realization} done")
    return rows


def summarize(rows: list[dict]) -> dict:
    """Mean metric and parameter count per (class, value)."""
    cells = defaultdict(list)
    for row in rows:
        cells[row["class"], row["value"]].append(row)
    table = defaultdict(dict)
    for (class_name, value), group in sorted(cells.items()):
        metrics = np.array([row["metric"] for row in group])
        table[class_name][str(value)] = {
            "mean": float(metrics.mean()),
            "std": float(metrics.std(ddof=1)) if metrics.size > 1 else 0.0,
            "n_params": group[0]["n_params"],
        }
    return dict(table)


def run(config: ExperimentConfig) -> dict:
    sweep = config.sweep
    selected_classes(config)
    tasks = [(config, value, realization)
             for value in sweep.values for realization in range(config.train.realizations)]
    rows = [row for part in run_tasks(run_sweep_point, tasks, config.threads, "sweep-hyper", config.quiet)
            for row in part]
    summary = {"param": sweep.param, "pert_size": sweep.pert_size, "results": summarize(rows)}
    write_outputs(config, rows, "sweep_hyper.csv", "sweep-hyper", summary)
    return summary
