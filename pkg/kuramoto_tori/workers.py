"""Worker pool helpers for independent numerical tasks.

numpy releases the GIL inside its linear-algebra kernels, so a thread pool
is enough to overlap eigensolves and batched integrations.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from kuramoto_tori.defaults import DEFAULT_MAX_THREADS, THREADS_ENV

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def threads_from_env(default: Optional[int] = None) -> int:
    """Worker cap from the KURA_THREADS environment variable.

    Falls back to min(DEFAULT_MAX_THREADS, cpu count) when unset or invalid.
    """
    fallback = default if default is not None else min(DEFAULT_MAX_THREADS, os.cpu_count() or 1)
    raw = os.getenv(THREADS_ENV)
    if raw is None:
        return fallback
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring {THREADS_ENV}={raw!r}: not an integer")
        return fallback
    if value < 1:
        logger.warning(f"Ignoring {THREADS_ENV}={value}: must be >= 1")
        return fallback
    return value


def ordered_map(fn: Callable[[T], R], items: Iterable[T], max_workers: int = 1) -> List[R]:
    """Apply fn to every item, in parallel when max_workers > 1.

    Results come back in input order whatever the worker count, so output
    built from them does not depend on scheduling.
    """
    work = list(items)
    if max_workers <= 1 or len(work) <= 1:
        return [fn(x) for x in work]

    with ThreadPoolExecutor(max_workers=max_workers, thread_name_prefix="kura") as pool:
        return list(pool.map(fn, work))
