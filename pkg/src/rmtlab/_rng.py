"""Deterministic random substreams.

Every sampler in the package takes a ``seed`` that is an integer, a tuple of
integers, or an already constructed :class:`numpy.random.Generator`.  Integer
seeds are expanded through :class:`numpy.random.SeedSequence` into a Philox
(counter-based) generator, and extra integer keys select independent
substreams.  Experiments key their streams by ``(seed, chunk_index)`` so the
draws never depend on how work is scheduled across threads.
"""
from __future__ import annotations

from typing import Sequence, Union

import numpy as np

SeedLike = Union[int, Sequence[int], np.random.Generator]


def substream(seed: SeedLike, *keys: int) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        if keys:
            raise TypeError("cannot derive keyed substreams from a Generator")
        return seed
    if isinstance(seed, (int, np.integer)):
        entropy = [int(seed)]
    else:
        entropy = [int(s) for s in seed]
    if any(e < 0 for e in entropy) or any(k < 0 for k in keys):
        raise ValueError("seeds and keys must be nonnegative integers")
    ss = np.random.SeedSequence(entropy + [int(k) for k in keys])
    return np.random.Generator(np.random.Philox(ss))


def open_uniform(rng: np.random.Generator, size) -> np.ndarray:
    """Uniforms on the open interval (0, 1); safe for inverse CDFs."""
    return rng.random(size) + 2.0**-54
