"""Deterministic, splittable random streams.

Every stream is a :class:`numpy.random.Generator` driven by the counter-based
Philox bit generator. Its state is derived from ``(seed, *key)`` through
:class:`numpy.random.SeedSequence`, so a Monte Carlo repetition always sees the
same draws no matter which worker thread executes it.
"""
import zlib

import numpy as np

__all__ = ["make_stream", "stream_key"]


def stream_key(part):
    """Map a key component (int or str) to a non-negative 32-bit integer."""
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError("stream key integers must be non-negative")
        return int(part)
    return zlib.crc32(str(part).encode("utf-8"))


def make_stream(seed, *key):
    """Return an independent generator for ``(seed, *key)``.

    Parameters
    ----------
    seed : int
        Master seed, a non-negative integer (64-bit values are fine).
    *key : int or str
        Path of the sub-stream, e.g. ``("coverage", rep_index)``.

    Returns
    -------
    numpy.random.Generator
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(stream_key(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
