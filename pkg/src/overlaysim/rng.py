"""Seed-substream derivation.

Every randomized purpose (graph wiring, latency draws, random neighbor
choice) gets its own child stream of the run seed. Reusing one stream across
purposes would let a change to one knob (say, the selection seed) reshuffle
draws belonging to another, making runs incomparable.
"""

from __future__ import annotations

import numpy as np

# purpose tags for substream keys
TOPOLOGY = 0
LATENCY = 1
RNS_CHOICE = 2

# Functions that consume randomness accept either a plain integer seed or an
# already-constructed generator (np.random.default_rng passes both through).
Seed = int | np.random.Generator


def substream(seed: int, purpose: int, *key: int) -> np.random.Generator:
    """Deterministic child generator for (seed, purpose, *key).

    Streams with different keys are statistically independent; the same key
    always yields the same stream, on every platform.
    """
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence(seed, spawn_key=(purpose, *key))
    return np.random.Generator(np.random.PCG64(ss))


def child_seed(seed: int, purpose: int, *key: int) -> int:
    """Collapse a substream key to a plain integer seed."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence(seed, spawn_key=(purpose, *key))
    return int(ss.generate_state(1, np.uint64)[0])
