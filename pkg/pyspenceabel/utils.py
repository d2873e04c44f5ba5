"""Worker-count resolution and an order-preserving thread pool map for the solver."""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence, TypeVar

from pyspenceabel.const import THREADS_ENV
from pyspenceabel.models import InvalidInput

_LOGGER = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(value: Optional[str] = None) -> int:
    """Worker count from SPENCE_ABEL_THREADS (default 1)."""
    raw = os.environ.get(THREADS_ENV) if value is None else value
    if raw is None or raw == "":
        return 1
    try:
        threads = int(raw)
    except ValueError as err:
        raise InvalidInput(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from err
    if threads < 1:
        raise InvalidInput(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return threads


def parallel_map(func: Callable[[T], R], items: Sequence[T], workers: Optional[int] = None) -> list[R]:
    """Apply func to every item, results in input order."""
    workers = resolve_threads() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    _LOGGER.debug("Mapping %d items on %d threads", len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
