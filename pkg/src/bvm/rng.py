"""Deterministic, splittable random streams.

Every random draw in this package flows through fixed-size chunks of a
counter-based Philox generator keyed by ``(seed, stream, chunk index)``.
A chunk is always generated in full and then sliced, so the first *k*
draws of a request never depend on how many draws were requested in
total, and work scheduled across any number of threads reproduces the
single-threaded result bit for bit.
"""

from __future__ import annotations

import numpy as np

# Draws per chunk. Small enough that fully materialising the final
# partial chunk is cheap, large enough that chunk bookkeeping is noise.
CHUNK_SIZE = 4096

# Stream ids used by the estimators. Callers composing their own
# multi-stream computations should pick ids well clear of these.
MODEL_STREAM = 0
DATA_STREAM = 1
TOLERANCE_STREAM = 2
RESAMPLE_STREAM = 3
BAND_STREAM = 7


def chunk_rng(seed: int, stream: int, chunk: int) -> np.random.Generator:
    """Fresh generator for one chunk of one named stream under a master seed."""
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(int(stream), int(chunk)))
    return np.random.Generator(np.random.Philox(ss))


def num_chunks(n: int) -> int:
    return -(-int(n) // CHUNK_SIZE)


def assemble_chunks(draw_chunk, seed: int, n: int, stream: int = 0) -> np.ndarray:
    """Concatenate ``draw_chunk(rng)`` over as many chunks as *n* needs.

    ``draw_chunk`` must return exactly ``CHUNK_SIZE`` draws along axis 0;
    the tail chunk is truncated here.
    """
    if n < 1:
        raise ValueError("sample count must be at least 1")
    parts = [draw_chunk(chunk_rng(seed, stream, c)) for c in range(num_chunks(n))]
    out = parts[0] if len(parts) == 1 else np.concatenate(parts, axis=0)
    return out[:n]
