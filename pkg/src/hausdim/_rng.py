"""Keyed seed derivation.

Every random draw in the package goes through :func:`generator` so that a
(seed, key path) pair always produces the same stream, independent of the
order in which work is scheduled.
"""

from __future__ import annotations

import numpy as np


def generator(seed: int, *keys: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(seq))


def child_seed(seed: int, *keys: int) -> int:
    """A fresh integer seed derived from ``seed`` and a key path."""
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
