"""Restart fan-out shared by the optimizers."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")


def thread_count() -> int:
    """Worker cap from ``QCAP_THREADS`` (default 1)."""
    raw = os.environ.get("QCAP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def spawn_rngs(seed, count: int) -> list[np.random.Generator]:
    """Independent generators, one per restart, derived from ``seed``."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    return [np.random.default_rng(s) for s in ss.spawn(count)]


def map_ordered(fn: Callable[..., T], items: Sequence) -> list[T]:
    """``[fn(x) for x in items]``, possibly threaded; output order is the input order."""
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
