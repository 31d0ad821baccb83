"""
Experiment commands: configuration, parallel sweeps and output writing.
"""
from .config import COMMANDS, ExperimentConfig, load_config
from .parallel import run_tasks
from . import ingest, spectra, sweep_hyper, train_eval, verify_bounds

RUNNERS = {
    "verify-bounds": verify_bounds.run,
    "train-eval": train_eval.run,
    "sweep-hyper": sweep_hyper.run,
    "spectra": spectra.run,
    "ingest-movielens": ingest.run,
}


def run_command(config: ExperimentConfig) -> dict:
    """Dispatch a resolved configuration to its command."""
    return RUNNERS[config.command](config)


__all__ = [
    "COMMANDS",
    "ExperimentConfig",
    "RUNNERS",
    "load_config",
    "run_command",
    "run_tasks",
]
