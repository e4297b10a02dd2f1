"""Seed fan-out: one process per seed, results returned in seed order."""
from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import TypeVar

from .config import RunConfig

logger = logging.getLogger("hybrid-sac.worker")

T = TypeVar("T")


def run_seeds(
    task: Callable[[RunConfig, int], T],
    config: RunConfig,
    seeds: Sequence[int] | None = None,
    workers: int | None = None,
) -> list[T]:
    """Apply ``task(config, seed)`` to every seed.

    Each seed derives all of its randomness from its own value, so the
    artifacts do not depend on the worker count. ``task`` must be a
    module-level function when more than one worker is used.
    """
    seeds = list(seeds if seeds is not None else config.seeds)
    workers = min(workers or config.workers, len(seeds))
    logger.info("running %s for seeds %s on %d worker(s)", getattr(task, "__name__", task), seeds, workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(task, [config] * len(seeds), seeds))
    return [task(config, seed) for seed in seeds]
