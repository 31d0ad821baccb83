"""
Fan experiment tasks out over worker processes.

Results come back in task order, so outputs do not depend on the number of
workers.
"""
import logging
import sys
from typing import Any, Callable, Sequence

from joblib import Parallel, delayed
from tqdm import tqdm

logger = logging.getLogger(__name__)


def show_progress(quiet: bool) -> bool:
    return not quiet and sys.stderr.isatty()


def run_tasks(function: Callable[[Any], Any], tasks: Sequence[Any], threads: int = 1,
              desc: str = "tasks", quiet: bool = False) -> list:
    """
    Apply function to every task, in-process or over `threads` workers.

    Args:
        function: module-level callable taking one task
        tasks: picklable task descriptions
        threads: worker processes; 1 runs serially
        desc: progress bar label
    """
    tasks = list(tasks)
    if not tasks:
        return []
    logger.info(f"[{desc}] {len(tasks)} tasks on {threads} worker(s)")
    progress = show_progress(quiet)
    if threads <= 1:
        return [function(task) for task in tqdm(tasks, desc=desc, disable=not progress)]
    runner = Parallel(n_jobs=threads, return_as="generator")
    results = runner(delayed(function)(task) for task in tasks)
    return list(tqdm(results, total=len(tasks), desc=desc, disable=not progress))
