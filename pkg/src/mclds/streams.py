"""Named, independent random sub-streams derived from one master seed.

Each module draws from its own stream, keyed by a fixed index, so adding or
re-ordering draws in one module never perturbs another module's numbers.
"""
from __future__ import annotations

import numpy as np

STREAM_INDEX = {
    "topology": 0,
    "activity": 1,
    "fading": 2,
    "reporting": 3,
    "database": 4,
    "classifier": 5,
    "escalation": 6,
    "faults": 7,
    "sensing": 8,
}


def substream(seed: int, name: str) -> np.random.Generator:
    """Generator for stream ``name`` of master ``seed``."""
    key = STREAM_INDEX[name]
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(key,)))


def point_seed(master_seed: int, value, replicate: int) -> int:
    """Seed for one sweep point, keyed on the swept value (not its position)
    so inserting a value into a sweep leaves every other point unchanged."""
    tag = [int(b) for b in repr(value).encode()]
    ss = np.random.SeedSequence(entropy=[int(master_seed), int(replicate), *tag])
    return int(ss.generate_state(2, dtype=np.uint32).view(np.uint64)[0] >> np.uint64(1))
