"""Seeded random streams.

Every stochastic step draws from its own stream, derived from
``(seed, purpose, index)``.  The generator is numpy's PCG64 fed by a
``SeedSequence`` whose entropy is ``[seed, crc32(purpose), index]``, so a
corpus or a search can be regenerated exactly from its seed.
"""

from __future__ import annotations

import zlib

import numpy as np


def stream(seed: int, purpose: str, index: int = 0) -> np.random.Generator:
    tag = zlib.crc32(purpose.encode("utf-8"))
    seq = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, tag, int(index)])
    return np.random.Generator(np.random.PCG64(seq))
