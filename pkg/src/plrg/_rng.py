"""Seed handling and schedule-independent replicate blocks.

Every random stream is derived from a master seed plus an integer key
tuple through :class:`numpy.random.SeedSequence` spawn keys, so the draws
used by replicate block ``b`` do not depend on which worker runs it.
"""
from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")


DEFAULT_BLOCK = 1 << 14


def key_of(label: str) -> int:
    """Stable 32-bit integer for a string label."""
    return zlib.crc32(label.encode("utf-8"))


def stream(seed: int, *key: int | str) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``."""
    spawn = tuple(key_of(k) if isinstance(k, str) else int(k) for k in key)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=spawn)))


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        return np.random.default_rng()
    return stream(int(seed))


def block_sizes(reps: int, block: int = DEFAULT_BLOCK) -> list[int]:
    full, rest = divmod(int(reps), block)
    return [block] * full + ([rest] if rest else [])


def replicate_blocks(
    fn: Callable[[np.random.Generator, int], T],
    seed: int,
    key: Sequence[int | str],
    reps: int,
    threads: int = 1,
    block: int = DEFAULT_BLOCK,
) -> list[T]:
    """Run ``fn(rng, size)`` over fixed-size replicate blocks.

    Results come back in block order whatever ``threads`` is, so any
    reduction done by the caller in list order is bit-reproducible.
    """
    sizes = block_sizes(reps, block)
    tasks = [(stream(seed, *key, b), s) for b, s in enumerate(sizes)]
    if threads <= 1 or len(tasks) <= 1:
        return [fn(r, s) for r, s in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda t: fn(*t), tasks))
