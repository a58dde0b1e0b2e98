"""Seeded random streams.

All randomness flows through Philox generators built from ``numpy.random.SeedSequence`` objects. Named
sub-streams are derived from the parent's entropy plus a spawn key, never by consuming the parent, so deriving
the same child twice always gives the same numbers.
"""

import zlib
from typing import Union

import numpy as np

Seed = Union[int, np.random.SeedSequence, np.random.Generator]


def as_seed_sequence(seed: Seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, np.random.Generator):
        # Consumes one draw from the generator; only used when a caller hands over a live stream.
        return np.random.SeedSequence(int(seed.integers(0, 2**63 - 1)))
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an int, SeedSequence or Generator, got {type(seed).__name__}")
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.SeedSequence(int(seed))


def as_generator(seed: Seed) -> np.random.Generator:
    """Returns a Philox-backed generator for ``seed`` (generators pass through untouched)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(as_seed_sequence(seed)))


def _label_key(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def named_stream(seed: Seed, label: str, *indices: int) -> np.random.SeedSequence:
    """Derives the sub-stream identified by ``label`` and optional integer indices."""
    parent = as_seed_sequence(seed)
    key = tuple(parent.spawn_key) + (_label_key(label),) + tuple(int(i) for i in indices)
    return np.random.SeedSequence(entropy=parent.entropy, spawn_key=key)


def child_streams(seed: Seed, count: int) -> list[np.random.SeedSequence]:
    """Derives ``count`` independent children without mutating the parent."""
    parent = as_seed_sequence(seed)
    return [
        np.random.SeedSequence(entropy=parent.entropy, spawn_key=tuple(parent.spawn_key) + (index,))
        for index in range(count)
    ]


def derived_seed(seed: Seed, label: str, *indices: int) -> int:
    """A plain integer seed for the sub-stream ``label``, for configs that carry their seed as an int."""
    return int(named_stream(seed, label, *indices).generate_state(1, dtype=np.uint32)[0])
