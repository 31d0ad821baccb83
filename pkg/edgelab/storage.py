"""
Plain-text persistence for graphs, filters, perturbations, checkpoints,
datasets and experiment outputs.

Every format is line oriented with decimal floats written to 17 significant
digits, so a save/load cycle reproduces the arrays exactly.
"""
import json
import os
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Union

import numpy as np
import pandas as pd

from datagen import SPLITS, DatasetSplit, LabeledSample
from edgenet import EdgeNet, EdgeNetConfig
from errors import InvalidInputError
from filters import FilterClass, FilterParams
from graphcore import GraphShiftOperator, from_adjacency
from perturb import Perturbation, PerturbationMode

PathLike = Union[str, Path]
FLOAT_FORMAT = "%.17g"
CSV_SCHEMA_VERSION = 1


@contextmanager
def open_text(path: PathLike, mode: str = "r"):
    """Open a text file, creating parent directories when writing."""
    if "w" in mode or "a" in mode:
        parent = os.path.dirname(os.fspath(path))
        if parent:
            os.makedirs(parent, exist_ok=True)
    handle = open(path, mode, encoding="utf-8")
    try:
        yield handle
    finally:
        handle.close()


def _format_row(values: Iterable[float]) -> str:
    return " ".join(FLOAT_FORMAT % value for value in values)


def _content_lines(path: PathLike) -> list[str]:
    try:
        with open_text(path) as handle:
            return [line.strip() for line in handle if line.strip() and not line.startswith("#")]
    except FileNotFoundError:
        raise InvalidInputError(f"File not found: {path}")


def _parse_floats(line: str, expected: int, path: PathLike) -> np.ndarray:
    try:
        values = np.array([float(token) for token in line.split()])
    except ValueError:
        raise InvalidInputError(f"{path}: non-numeric entry in '{line[:60]}'")
    if values.size != expected:
        raise InvalidInputError(f"{path}: expected {expected} values, got {values.size}")
    return values


# ============ Graph Functions ============

def save_graph(operator: GraphShiftOperator, path: PathLike):
    """Edge list: header `n m`, then `i j w` per edge with i < j."""
    rows, cols = np.nonzero(np.triu(operator.matrix))
    with open_text(path, "w") as handle:
        handle.write(f"{operator.n} {rows.size}\n")
        for i, j in zip(rows, cols):
            handle.write(f"{i} {j} {FLOAT_FORMAT % operator.matrix[i, j]}\n")


def load_graph(path: PathLike, normalize: bool = False) -> GraphShiftOperator:
    """Rebuild an operator from an edge list; weights are used as stored."""
    lines = _content_lines(path)
    if not lines:
        raise InvalidInputError(f"{path}: empty graph file")
    try:
        n, m = (int(token) for token in lines[0].split())
    except ValueError:
        raise InvalidInputError(f"{path}: header must be 'n m', got '{lines[0]}'")
    if len(lines) - 1 != m:
        raise InvalidInputError(f"{path}: header announces {m} edges, found {len(lines) - 1}")
    matrix = np.zeros((n, n))
    for line in lines[1:]:
        tokens = line.split()
        if len(tokens) != 3:
            raise InvalidInputError(f"{path}: edge line must be 'i j w', got '{line}'")
        i, j, weight = int(tokens[0]), int(tokens[1]), float(tokens[2])
        if not (0 <= i < n and 0 <= j < n):
            raise InvalidInputError(f"{path}: edge ({i}, {j}) outside 0..{n - 1}")
        matrix[i, j] = matrix[j, i] = weight
    return from_adjacency(matrix, normalize=normalize)


# ============ Filter Functions ============

def _filter_lines(params: FilterParams) -> list[str]:
    lines = [f"{params.n} {params.order} {params.class_tag.value}"]
    if params.class_tag is FilterClass.CONVOLUTIONAL:
        lines.append(_format_row(params.matrices[:, 0, 0]))
    elif params.class_tag is FilterClass.NODE_VARYING:
        lines.extend(_format_row(np.diag(matrix)) for matrix in params.matrices)
    else:
        lines.extend(_format_row(row) for matrix in params.matrices for row in matrix)
    return lines


def _parse_filter(lines: list[str], path: PathLike) -> tuple[FilterParams, int]:
    """Parse one filter block; returns the filter and the lines consumed."""
    header = lines[0].split()
    if len(header) != 3:
        raise InvalidInputError(f"{path}: filter header must be 'n K class_tag', got '{lines[0]}'")
    n, order, class_tag = int(header[0]), int(header[1]), FilterClass.parse(header[2])
    taps = order + 1
    if class_tag is FilterClass.CONVOLUTIONAL:
        scalars = _parse_floats(lines[1], taps, path)
        matrices = scalars[:, None, None] * np.eye(n)[None]
        return FilterParams(matrices=matrices, class_tag=class_tag, coefficients=scalars), 2
    if class_tag is FilterClass.NODE_VARYING:
        diagonals = np.stack([_parse_floats(line, n, path) for line in lines[1:1 + taps]])
        matrices = np.zeros((taps, n, n))
        matrices[:, np.arange(n), np.arange(n)] = diagonals
        return FilterParams(matrices=matrices, class_tag=class_tag, coefficients=diagonals), 1 + taps
    count = taps * n
    if len(lines) < 1 + count:
        raise InvalidInputError(f"{path}: filter block truncated")
    rows = np.stack([_parse_floats(line, n, path) for line in lines[1:1 + count]])
    return FilterParams(matrices=rows.reshape(taps, n, n), class_tag=class_tag), 1 + count


def save_filter(params: FilterParams, path: PathLike):
    with open_text(path, "w") as handle:
        handle.write("\n".join(_filter_lines(params)) + "\n")


def load_filter(path: PathLike) -> FilterParams:
    params, _ = _parse_filter(_content_lines(path), path)
    return params


# ============ Perturbation Functions ============

def save_perturbation(perturbation: Perturbation, path: PathLike):
    """Header `n size mode seed`, then the matrix rows."""
    with open_text(path, "w") as handle:
        handle.write(f"{perturbation.n} {FLOAT_FORMAT % perturbation.size} {perturbation.mode.value} {perturbation.seed}\n")
        for row in perturbation.matrix:
            handle.write(_format_row(row) + "\n")


def load_perturbation(path: PathLike) -> Perturbation:
    lines = _content_lines(path)
    header = lines[0].split()
    if len(header) != 4:
        raise InvalidInputError(f"{path}: header must be 'n size mode seed', got '{lines[0]}'")
    n = int(header[0])
    matrix = np.stack([_parse_floats(line, n, path) for line in lines[1:1 + n]])
    seed = None if header[3] == "None" else int(header[3])
    return Perturbation(matrix=matrix, size=float(header[1]), mode=PerturbationMode.parse(header[2]), seed=seed)


# ============ Checkpoint Functions ============

def save_checkpoint(net: EdgeNet, path: PathLike):
    """Config header, one filter block per (layer, f, g), then the readout."""
    header = {"config": net.config.model_dump(mode="json"), "bank": net.parameterization.name == "fixed_bank"}
    lines = ["# edgenet checkpoint v1", json.dumps(header, sort_keys=True)]
    for layer in range(net.config.layers):
        for f, row in enumerate(net.layer_filters(layer)):
            for g, params in enumerate(row):
                lines.append(f"filter {layer} {f} {g}")
                lines.extend(_filter_lines(params))
    weight = net.params["readout.weight"]
    lines.append(f"readout {weight.shape[0]} {weight.shape[1]}")
    lines.extend(_format_row(row) for row in weight)
    lines.append(_format_row(net.params["readout.bias"]))
    with open_text(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def load_checkpoint(path: PathLike, operator: GraphShiftOperator) -> EdgeNet:
    """Rebuild a network on the graph it was trained on."""
    lines = _content_lines(path)
    header = json.loads(lines[0])
    config = EdgeNetConfig.model_validate(header["config"])
    cursor = 1
    filters: dict[tuple[int, int, int], FilterParams] = {}
    while lines[cursor].startswith("filter "):
        _, layer, f, g = lines[cursor].split()
        params, consumed = _parse_filter(lines[cursor + 1:], path)
        filters[(int(layer), int(f), int(g))] = params
        cursor += 1 + consumed

    def grid(layer: int) -> list[list[FilterParams]]:
        inputs = config.in_features if layer == 0 else config.features
        return [[filters[(layer, f, g)] for g in range(inputs)] for f in range(config.features)]

    if header.get("bank"):
        net = EdgeNet.from_filter_bank(config, operator, [grid(layer) for layer in range(config.layers)])
    else:
        net = EdgeNet(config, operator)
        for layer in range(config.layers):
            net.params[f"layer{layer}"] = np.array(
                [[net.parameterization.from_filter(params) for params in row] for row in grid(layer)]
            )

    _, rows, cols = lines[cursor].split()
    rows, cols = int(rows), int(cols)
    net.params["readout.weight"] = np.stack([_parse_floats(line, cols, path) for line in lines[cursor + 1:cursor + 1 + rows]])
    net.params["readout.bias"] = _parse_floats(lines[cursor + 1 + rows], cols, path)
    return net


# ============ Dataset Functions ============

def save_dataset(split: DatasetSplit, path: PathLike):
    """JSON header line, then one JSON sample per line."""
    header = {"format": "edgelab-dataset", "version": 1, "kind": split.kind, "seed": split.seed,
              "params": split.params, "sizes": split.sizes()}
    with open_text(path, "w") as handle:
        handle.write(json.dumps(header) + "\n")
        for name in SPLITS:
            for sample in split.part(name):
                label = sample.label if sample.has_label() else None
                record = {"split": name, "label": label, "meta": sample.meta, "signal": sample.signal.tolist()}
                handle.write(json.dumps(record) + "\n")


def load_dataset(path: PathLike) -> DatasetSplit:
    lines = _content_lines(path)
    header = json.loads(lines[0])
    if header.get("format") != "edgelab-dataset":
        raise InvalidInputError(f"{path}: not an edgelab dataset file")
    parts = {name: [] for name in SPLITS}
    for line in lines[1:]:
        record = json.loads(line)
        label = float("nan") if record["label"] is None else record["label"]
        parts[record["split"]].append(LabeledSample(signal=np.array(record["signal"], dtype=float),
                                                    label=label, meta=record["meta"]))
    return DatasetSplit(train=parts["train"], validation=parts["validation"], test=parts["test"],
                        seed=header["seed"], kind=header["kind"], params=header["params"])


# ============ Output Functions ============

def write_csv(rows: list[dict], path: PathLike, schema: str) -> Path:
    """CSV with a versioned schema comment line followed by the header row."""
    frame = pd.DataFrame(rows)
    with open_text(path, "w") as handle:
        handle.write(f"# edgelab {schema} schema v{CSV_SCHEMA_VERSION}\n")
        frame.to_csv(handle, index=False, lineterminator="\n")
    return Path(path)


def read_csv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def write_text(path: PathLike, text: str) -> Path:
    with open_text(path, "w") as handle:
        handle.write(text)
    return Path(path)


def write_resolved_config(config, out_dir: PathLike) -> list[Path]:
    """Snapshot of the fully resolved config as key = value text and JSON."""
    text_path = Path(out_dir) / "config.resolved.txt"
    json_path = Path(out_dir) / "config.resolved.json"
    write_text(text_path, config.to_text())
    write_text(json_path, json.dumps(config.model_dump(mode="json"), indent=2, sort_keys=True) + "\n")
    return [text_path, json_path]


PLOT_TEMPLATES = {
    "verify-bounds": '''
frame = pd.read_csv(CSV, comment="#")
figure, (by_size, by_eps) = plt.subplots(1, 2, figsize=(11, 4))
fixed_eps = frame["eps_target"].max()
subset = frame[frame["eps_target"] == fixed_eps]
for name, group in subset.groupby("class"):
    means = group.groupby("pert_size")[["empirical", "bound"]].mean()
    by_size.loglog(means.index, means["empirical"], "o-", label=f"{name} empirical")
    by_size.loglog(means.index, means["bound"], "--", label=f"{name} bound")
by_size.set_xlabel("perturbation size")
by_size.set_ylabel("output deviation")
by_size.legend(fontsize=7)
fixed_size = frame["pert_size"].max()
subset = frame[frame["pert_size"] == fixed_size]
for name, group in subset.groupby("class"):
    means = group.groupby("eps_target")[["empirical", "bound"]].mean()
    by_eps.semilogy(means.index, means["empirical"], "o-", label=f"{name} empirical")
    by_eps.semilogy(means.index, means["bound"], "--", label=f"{name} bound")
by_eps.set_xlabel("eigenvector misalignment")
by_eps.legend(fontsize=7)
''',
    "train-eval": '''
frame = pd.read_csv(CSV, comment="#")
figure, axis = plt.subplots(figsize=(6, 4))
for name, group in frame.groupby("class"):
    stats = group.groupby("pert_size")["metric"].agg(["mean", "std"])
    axis.errorbar(stats.index, stats["mean"], yerr=stats["std"], marker="o", capsize=3, label=name)
axis.set_xlabel("perturbation size")
axis.set_ylabel(frame["metric_name"].iloc[0])
axis.legend()
''',
    "sweep-hyper": '''
frame = pd.read_csv(CSV, comment="#")
figure, axis = plt.subplots(figsize=(6, 4))
for name, group in frame.groupby("class"):
    stats = group.groupby("value")["metric"].agg(["mean", "std"])
    axis.errorbar(stats.index, stats["mean"], yerr=stats["std"], marker="o", capsize=3, label=name)
axis.set_xlabel(frame["param"].iloc[0])
axis.set_ylabel("accuracy under perturbation")
axis.legend()
''',
    "spectra": '''
frame = pd.read_csv(CSV, comment="#")
filters = frame["filter"].unique()
figure, axes = plt.subplots(1, len(filters), figsize=(4 * len(filters), 3.5), squeeze=False)
for axis, name in zip(axes[0], filters):
    group = frame[frame["filter"] == name]
    axis.plot(group["lambda"], group["response"], "o", markersize=3, label="original")
    axis.plot(group["lambda_perturbed"], group["response_perturbed"], "x", markersize=3, label="perturbed")
    axis.set_title(name)
    axis.set_xlabel("graph frequency")
axes[0][0].legend()
''',
}


def write_plot_script(path: PathLike, csv_name: str, kind: str) -> Path:
    """Standalone matplotlib script that renders a results CSV next to it."""
    if kind not in PLOT_TEMPLATES:
        raise InvalidInputError(f"Unknown plot kind '{kind}'. Available: {list(PLOT_TEMPLATES)}")
    image_name = os.path.splitext(csv_name)[0] + ".png"
    script = (
        f'"""Render {csv_name}. Run: python {os.path.basename(os.fspath(path))}"""\n'
        "import os\n\n"
        "import matplotlib.pyplot as plt\n"
        "import pandas as pd\n\n"
        f'CSV = os.path.join(os.path.dirname(os.path.abspath(__file__)), "{csv_name}")\n'
        + PLOT_TEMPLATES[kind]
        + "plt.tight_layout()\n"
        + f'plt.savefig(os.path.join(os.path.dirname(CSV), "{image_name}"), dpi=150)\n'
    )
    return write_text(path, script)
