"""Seed plumbing.

Every stochastic component draws from numpy Generators derived from one
root seed plus small integer stream tags, so runs are reproducible and
distinct stages (init, per-epoch sampling, splitting) never share a
stream.
"""

from __future__ import annotations

import numpy as np


def normalize_seed(seed: int) -> int:
    # SeedSequence wants non-negative entropy words
    return int(seed) % (2**63)


def seeded_rng(seed: int, *tags: int) -> np.random.Generator:
    """Generator for stream (seed, *tags); same arguments, same stream."""
    entropy = [normalize_seed(seed)] + [normalize_seed(t) for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entropy))
