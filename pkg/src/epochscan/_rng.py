"""Reproducible random streams.

Every stream is a PCG64 generator seeded from a 64-bit master seed and then
advanced with ``jumped(k)``: substream ``k`` starts ``k`` jumps of about
``0.618 * 2**128`` steps into the sequence, so substreams never overlap for
any realistic number of draws. Gaussian variates come from
numpy's ziggurat sampler (``Generator.standard_normal``).
"""
from __future__ import annotations

import numpy as np

_SEED_MASK = (1 << 64) - 1


def substream(seed: int, index: int = 0) -> np.random.Generator:
    if index < 0:
        raise ValueError("substream index must be nonnegative")
    bitgen = np.random.PCG64(int(seed) & _SEED_MASK)
    if index:
        bitgen = bitgen.jumped(index)
    return np.random.Generator(bitgen)
