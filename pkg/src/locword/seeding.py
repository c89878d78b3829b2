"""Deterministic seed derivation.

Ensemble member i draws from a stream derived from (base_seed, i) through
numpy's SeedSequence spawning, so realizations are independent, order-free
(member 7 is the same whether or not members 0..6 were ever drawn), and
bit-for-bit reproducible.  Within one realization, separate lanes (origin
word, rightward words, leftward words) get their own child streams so a
window can be extended in either direction without disturbing the other.
"""

from __future__ import annotations

import numpy as np

# Lane indices for the per-realization child streams.
LANE_ORIGIN = 0
LANE_RIGHT = 1
LANE_LEFT = 2


def spawn_seed(base_seed: int, index: int) -> int:
    """64-bit seed for ensemble member `index` derived from `base_seed`."""
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def lane_stream(seed: int, lane: int) -> np.random.Generator:
    """Independent generator for one lane of a single realization."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(lane,))
    return np.random.default_rng(ss)
