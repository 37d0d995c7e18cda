# ghp/seeding.py
"""Counter-based random streams and an order-preserving thread map.

All randomness flows from one root seed. A stream is addressed by the root
seed plus a tuple of integer counters (epoch, batch, ...), so results never
depend on how work is scheduled across threads.
"""

from collections.abc import Callable, Iterable, Sequence
from typing import TypeVar

import numpy as np
from joblib import Parallel, delayed

from .config import resolve_threads

T = TypeVar("T")
R = TypeVar("R")

# Stream namespaces used as the first counter
STREAM_INIT = 0
STREAM_SHUFFLE = 1
STREAM_BATCH = 2
STREAM_EVAL = 3
STREAM_PROTOCOL = 4


def generator(root_seed: int, *counters: int) -> np.random.Generator:
    """Build the generator addressed by `root_seed` and `counters`."""
    return np.random.default_rng(np.random.SeedSequence([root_seed, *counters]))


def spawn(rng: np.random.Generator, count: int) -> list[np.random.Generator]:
    """Derive `count` independent child generators from `rng`."""
    return list(rng.spawn(count))


def parallel_map(
    fn: Callable[[T], R], items: Iterable[T], threads: int | None = None
) -> list[R]:
    """Apply `fn` to every item, preserving order.

    Args:
        fn (Callable): Function applied to each item.
        items (Iterable): Inputs.
        threads (int | None): Worker cap; resolved by `resolve_threads`.

    Returns:
        list: Results in input order.

    """
    items = list(items)
    workers = min(resolve_threads(threads), max(len(items), 1))
    if workers <= 1:
        return [fn(item) for item in items]
    tasks = (delayed(fn)(item) for item in items)
    return Parallel(n_jobs=workers, prefer="threads")(tasks)


def pairs(rows: Sequence, cols: Sequence) -> list[tuple[int, int]]:
    """All (row, column) index pairs in row-major order."""
    return [(k, j) for k in range(len(rows)) for j in range(len(cols))]
