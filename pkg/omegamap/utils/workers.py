import logging
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Any, Callable, List, Sequence
from tqdm import tqdm
from ..errors import ValidationError

logger = logging.getLogger(__name__)

THREADS_ENV = "OMEGA_MAP_THREADS"

# Global variable for the worker processes
global_shared = None


def worker_count(max_workers: int | None = None) -> int:
    """
    Number of worker processes: the explicit value, else OMEGA_MAP_THREADS, else the CPU count.

    Args:
        max_workers (int | None): Explicit cap. Defaults to None.

    Returns:
        int: A positive worker count.
    """
    if max_workers is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                max_workers = int(env)
            except ValueError:
                raise ValidationError(f"{THREADS_ENV}={env!r} is not an integer", code="invalid_threads")
        else:
            max_workers = os.cpu_count() or 1
    if max_workers < 1:
        raise ValidationError(f"worker count must be >= 1, got {max_workers}", code="invalid_threads")
    return max_workers


def initialize_worker(shared: Any) -> None:
    """
    Initializer function for worker processes.

    Args:
        shared (Any): Immutable context every task reads (model, omega, grid parameters).
    """
    global global_shared
    global_shared = shared


def _run_task(func: Callable[[Any, Any], Any], item: Any) -> Any:
    return func(global_shared, item)


def run_batch(
    func: Callable[[Any, Any], Any],
    items: Sequence[Any],
    shared: Any,
    max_workers: int | None = None,
    desc: str | None = None,
) -> List[Any]:
    """
    Evaluate func(shared, item) for every item, in a process pool when more than one worker is
    allowed. Results come back in the order of `items` whatever the completion order.

    Args:
        func (Callable): Module-level function of (shared, item).
        items (Sequence): Work items.
        shared (Any): Context installed once per worker.
        max_workers (int | None): Worker cap, see `worker_count`. Defaults to None.
        desc (str | None): Progress bar label. Defaults to None.

    Returns:
        List[Any]: One result per item.
    """
    workers = min(worker_count(max_workers), max(1, len(items)))
    show = logger.isEnabledFor(logging.INFO)
    if workers == 1:
        return [func(shared, item) for item in tqdm(items, desc=desc, disable=not show)]

    logger.debug(f"running {len(items)} tasks on {workers} workers")
    results = [None] * len(items)
    with ProcessPoolExecutor(
        max_workers=workers,
        initializer=initialize_worker,
        initargs=(shared,),
    ) as executor:
        futures = {executor.submit(_run_task, func, item): i for i, item in enumerate(items)}
        for future in tqdm(as_completed(futures), total=len(futures), desc=desc, disable=not show):
            index = futures[future]
            results[index] = future.result()
    return results
