"""Deterministic per-task random streams and an order-preserving parallel map."""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

# namespaces keep streams for different purposes disjoint under one master seed
STREAM_FIELD = 1
STREAM_REPLICATE = 2
STREAM_GOF = 3


def worker_count(workers=None):
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("TAILDEP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def stream(master_seed, namespace, index):
    """Generator for task ``index`` in ``namespace``; independent of scheduling."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(namespace), int(index)))
    return np.random.default_rng(ss)


def master_seed_from(rng_or_seed):
    """Accept an int seed or a Generator (from which a seed is drawn)."""
    if isinstance(rng_or_seed, np.random.Generator):
        return int(rng_or_seed.integers(0, 2**63 - 1))
    if rng_or_seed is None:
        return 0
    return int(rng_or_seed)


def parallel_map(fn, items, workers=None):
    """``list(map(fn, items))``, optionally on a thread pool; order is preserved."""
    items = list(items)
    n = worker_count(workers)
    if n == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
