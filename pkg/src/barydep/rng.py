"""Deterministic random streams.

Every random draw in the package flows through Philox, a counter-based bit
generator, keyed by (seed, stream ids).  The same key reproduces the same
draws on any platform, and distinct stream ids give independent streams, so
concurrent use never changes results.
"""
from __future__ import annotations

import numpy as np

# stream ids; keep unique across the package
LANDMARK_INIT = 1
SDE_NOISE = 2
AR_COEFF_UPPER = 3
AR_COEFF_CROSS = 4
AR_COEFF_LOWER = 5
AR_NOISE = 6
PIPELINE_FIT = 7
PIPELINE_RETRY = 8


def generator(seed: int, *stream: int) -> np.random.Generator:
    """A Philox generator keyed by (seed, stream ids)."""
    key = np.random.SeedSequence([int(seed), *(int(s) for s in stream)])
    return np.random.Generator(np.random.Philox(key))
