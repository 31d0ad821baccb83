"""
Shared pieces of the experiment commands.
"""
import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np

from edgenet import EdgeNetConfig, TrainingConfig
from filters import FilterClass
from graphcore import GraphShiftOperator, get_generator
from storage import write_csv, write_plot_script, write_resolved_config, write_text
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

# Classes trained through another parameterization
TRAINED_AS = {FilterClass.EIGENVECTOR_SHARING: FilterClass.NODE_VARYING}


def generator_kwargs(config: ExperimentConfig) -> dict:
    graph = config.graph
    if graph.generator == "sbm":
        return {"n": graph.n, "communities": graph.communities, "p_intra": graph.p_intra, "p_inter": graph.p_inter}
    if graph.generator == "erdos_renyi":
        return {"n": graph.n, "p": graph.p}
    return {"n": graph.n}


def build_graph(config: ExperimentConfig, seed: int) -> GraphShiftOperator:
    generator = get_generator(config.graph.generator, **generator_kwargs(config))
    return generator.build(seed, config.graph.retries)


def net_config(config: ExperimentConfig, class_tag: FilterClass, outputs: int, seed: int,
               **updates) -> EdgeNetConfig:
    net = config.net
    values = {
        "layers": net.layers,
        "features": net.features,
        "order": net.order,
        "in_features": 1,
        "outputs": outputs,
        "class_tag": TRAINED_AS.get(class_tag, class_tag),
        "nonlinearity": net.nonlinearity,
        "readout": net.readout,
        "seed": seed,
        "init_scale": net.init_scale,
    }
    values.update(updates)
    return EdgeNetConfig(**values)


def training_config(config: ExperimentConfig, task: str, seed: int) -> TrainingConfig:
    train = config.train
    return TrainingConfig(lr=train.lr, beta1=train.beta1, beta2=train.beta2, epochs=train.epochs,
                          batch_size=train.batch_size, seed=seed, task=task, progress=False)


def task_seed(*parts: int) -> int:
    """Deterministic seed for one grid point."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def parse_classes(names: list[str]) -> list[FilterClass]:
    return [FilterClass.parse(name) for name in names]


def write_outputs(config: ExperimentConfig, rows: list[dict], csv_name: str, plot_kind: Optional[str] = None,
                  summary: Optional[dict] = None) -> list[Path]:
    """Results CSV, optional plot script and summary, plus the resolved config."""
    out = config.output_path
    written = [write_csv(rows, out / csv_name, config.command)]
    if plot_kind is not None:
        written.append(write_plot_script(out / f"plot_{Path(csv_name).stem}.py", csv_name, plot_kind))
    if summary is not None:
        written.append(write_text(out / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n"))
    written.extend(write_resolved_config(config, out))
    for path in written:
        logger.info(f"[{config.command}] wrote {path}")
    return written
