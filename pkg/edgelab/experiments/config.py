"""
Experiment configuration: pydantic sections per command, loaded from
`key = value` text files with dotted section keys and `--set` overrides.
"""
import os
from pathlib import Path
from typing import Annotated, Any, Iterable, Literal, Optional, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field

from errors import InvalidInputError
from graphcore import default_retries

COMMANDS = ("verify-bounds", "train-eval", "sweep-hyper", "spectra", "ingest-movielens")


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


FloatList = Annotated[list[float], BeforeValidator(_split_list)]
IntList = Annotated[list[int], BeforeValidator(_split_list)]
NameList = Annotated[list[str], BeforeValidator(_split_list)]


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GraphSection(Section):
    generator: str = Field(default_factory=lambda: os.getenv("EDGELAB_GENERATOR", "sbm"))
    n: int = Field(default=100, ge=1)
    communities: int = Field(default=10, ge=1)
    p_intra: float = Field(default=0.8, ge=0, le=1)
    p_inter: float = Field(default=0.2, ge=0, le=1)
    # erdos_renyi edge probability
    p: float = Field(default=0.3, ge=0, le=1)
    retries: int = Field(default_factory=default_retries, ge=1)


class NetSection(Section):
    layers: int = Field(default=2, ge=1)
    features: int = Field(default=2, ge=1)
    order: int = Field(default=3, ge=0)
    nonlinearity: str = Field(default_factory=lambda: os.getenv("EDGELAB_NONLINEARITY", "relu"))
    readout: Literal["flatten", "pool", "node"] = "flatten"
    init_scale: float = Field(default=1.0, gt=0)


class VerifySection(Section):
    classes: NameList = ["shift_invariant", "eigenvector_sharing", "general"]
    pert_sizes: FloatList = [0.001, 0.002, 0.004, 0.008, 0.01, 0.02, 0.05]
    eps_values: FloatList = [0.0, 0.05, 0.1, 0.2]
    seeds: int = Field(default=100, ge=1)
    mode: str = "dense-random"
    grid: int = Field(default=2001, ge=2)
    graph_specific: bool = False
    # sizes at or below this enter the through-origin fit
    fit_max_size: float = Field(default=0.008, gt=0)
    compare_size: float = Field(default=0.01, ge=0)
    remainder_threshold: float = Field(default=0.1, gt=0)
    first_order_limit: float = Field(default=0.05, ge=0)


class TrainSection(Section):
    task: Literal["source", "movielens"] = "source"
    classes: NameList = ["convolutional", "eigenvector_sharing", "shift_invariant", "general"]
    sizes: IntList = [1000, 100, 100]
    t_max: int = Field(default=20, ge=1)
    noise_std: float = Field(default=1e-2, ge=0)
    realizations: int = Field(default=5, ge=1)
    splits: int = Field(default=1, ge=1)
    pert_sizes: FloatList = [0.0, 0.01, 0.02, 0.05, 0.1]
    mode: str = "dense-random"
    lr: float = Field(default=1e-3, ge=0)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    epochs: int = Field(default=40, ge=0)
    batch_size: int = Field(default=64, ge=1)


class SweepSection(Section):
    param: Literal["features", "order", "layers"] = "features"
    values: IntList = [2, 4, 8, 16]
    pert_size: float = Field(default=0.01, ge=0)


class SpectraSection(Section):
    pert_size: float = Field(default=0.05, ge=0)
    mode: str = "dense-random"
    order: int = Field(default=3, ge=0)
    # target misalignment of the rotated filter bases
    eps: float = Field(default=0.1, ge=0, lt=0.7)


class MovieLensSection(Section):
    path: Optional[str] = Field(default_factory=lambda: os.getenv("EDGELAB_MOVIELENS"))
    top_k: int = Field(default=10, ge=1)
    target_item: Optional[int] = None
    keep_negative: bool = False
    test_fraction: float = Field(default=0.1, gt=0, lt=1)


class ExperimentConfig(Section):
    """Everything one command run needs; the resolved copy reproduces the run."""
    command: Literal["verify-bounds", "train-eval", "sweep-hyper", "spectra", "ingest-movielens"]
    seed: int = 0
    out_dir: str = Field(default_factory=lambda: os.getenv("EDGELAB_OUT_DIR", "results"))
    threads: int = Field(default_factory=lambda: int(os.getenv("EDGELAB_THREADS", "1")), ge=1)
    quiet: bool = False
    strict: bool = False
    graph: GraphSection = Field(default_factory=GraphSection)
    net: NetSection = Field(default_factory=NetSection)
    verify: VerifySection = Field(default_factory=VerifySection)
    train: TrainSection = Field(default_factory=TrainSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    spectra: SpectraSection = Field(default_factory=SpectraSection)
    movielens: MovieLensSection = Field(default_factory=MovieLensSection)

    @property
    def output_path(self) -> Path:
        return Path(self.out_dir) / self.command

    def to_text(self) -> str:
        """Resolved settings as `key = value` lines, loadable by load_config."""
        lines = [f"# edgelab resolved configuration for {self.command}"]
        for key, value in flatten(self.model_dump(mode="json")):
            lines.append(f"{key} = {format_value(value)}")
        return "\n".join(lines) + "\n"


# Per-command defaults applied beneath the config file and overrides
PRESETS: dict[str, dict[str, Any]] = {
    "verify-bounds": {},
    "train-eval": {
        "graph.n": 50, "graph.communities": 5,
        "net.layers": 1, "net.features": 8,
    },
    "sweep-hyper": {
        "graph.n": 50, "graph.communities": 5,
        "net.layers": 1, "net.features": 8, "train.realizations": 3,
    },
    "spectra": {},
    "ingest-movielens": {},
}


# ============ Parsing Functions ============

def flatten(values: dict, prefix: str = "") -> Iterable[tuple[str, Any]]:
    for key, value in values.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            yield from flatten(value, dotted + ".")
        else:
            yield dotted, value


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ", ".join(format_value(item) for item in value)
    return str(value)


def parse_assignment(text: str, origin: str = "--set") -> tuple[str, str]:
    """Split `key = value`; the value stays a string for pydantic to coerce."""
    if "=" not in text:
        raise InvalidInputError(f"{origin}: expected key = value, got '{text}'")
    key, value = text.split("=", 1)
    key = key.strip()
    if not key:
        raise InvalidInputError(f"{origin}: empty key in '{text}'")
    return key, value.strip()


def read_config_file(path: Union[str, Path]) -> dict[str, str]:
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.readlines()
    except FileNotFoundError:
        raise InvalidInputError(f"Config file not found: {path}")
    values = {}
    for number, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if line:
            key, value = parse_assignment(line, f"{path}:{number}")
            values[key] = value
    return values


def nest(values: dict[str, Any]) -> dict[str, Any]:
    """Expand dotted keys into nested section dicts."""
    nested: dict[str, Any] = {}
    for key, value in values.items():
        parts = key.split(".")
        target = nested
        for part in parts[:-1]:
            target = target.setdefault(part, {})
            if not isinstance(target, dict):
                raise InvalidInputError(f"'{part}' is a value, not a section (in '{key}')")
        if value == "" and parts[-1] in ("path", "target_item"):
            value = None
        target[parts[-1]] = value
    return nested


def load_config(
    command: str,
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Iterable[str]] = None,
    **flags: Any,
) -> ExperimentConfig:
    """
    Resolve a command's configuration.

    Precedence, lowest first: model defaults, command presets, the config
    file, `--set key=value` overrides, then explicit flags (seed, out_dir,
    threads, quiet, strict) that are not None.

    Raises:
        InvalidInputError: unknown command or malformed line
        pydantic.ValidationError: unknown key or out-of-range value
    """
    if command not in COMMANDS:
        raise InvalidInputError(f"Unknown command '{command}'. Available: {list(COMMANDS)}")
    values: dict[str, Any] = dict(PRESETS[command])
    if path is not None:
        values.update(read_config_file(path))
    for override in overrides or []:
        key, value = parse_assignment(override)
        values[key] = value
    values.update({key: value for key, value in flags.items() if value is not None})
    values["command"] = command
    return ExperimentConfig.model_validate(nest(values))
