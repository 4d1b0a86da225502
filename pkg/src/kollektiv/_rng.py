"""Counter-based uniform streams.

Position ``i`` of the stream for ``seed`` depends only on ``(seed, i)``: the
stream is cut into fixed chunks and chunk ``k`` gets its own generator seeded
from ``SeedSequence(seed, spawn_key=(k,))``. Chunks can therefore be produced
independently, in any order, on any worker.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 1 << 16
MAX_SEED = (1 << 64) - 1


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministically mix ``keys`` into ``seed``, giving a new u64 seed."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(keys))
    lo, hi = ss.generate_state(2, np.uint32)
    return (int(hi) << 32) | int(lo)


def _chunk(seed: int, k: int) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(k,))
    return np.random.Generator(np.random.PCG64(ss)).random(CHUNK)


def uniforms(seed: int, start: int, stop: int, workers: int | None = None) -> np.ndarray:
    """Uniform [0, 1) draws for stream positions ``start .. stop-1``."""
    seed = check_seed(seed)
    if stop <= start:
        return np.empty(0)
    first, last = start // CHUNK, (stop - 1) // CHUNK
    ks = range(first, last + 1)
    if workers and workers > 1 and len(ks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda k: _chunk(seed, k), ks))
    else:
        parts = [_chunk(seed, k) for k in ks]
    out = np.concatenate(parts)
    off = first * CHUNK
    return out[start - off:stop - off]
