"""Seeded random streams keyed by position.

Streams are derived from a root entropy value and an integer key path, so a
trial's randomness depends only on where it sits in the run (level, trial
index, repeat index) and never on scheduling order.
"""

from __future__ import annotations

import numpy as np

ROOT_ENTROPY_BITS = 63


def fresh_seed() -> int:
    """Draw a new master seed from operating-system entropy."""
    entropy = np.random.SeedSequence().entropy
    return int(entropy) % (1 << ROOT_ENTROPY_BITS)


def make_rng(seed: int) -> np.random.Generator:
    """Return the master generator for ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed))


def derive_root(rng: np.random.Generator) -> int:
    """Draw a root entropy value for keyed child streams from ``rng``."""
    return int(rng.integers(0, 1 << ROOT_ENTROPY_BITS))


def stream_for(root: int, *key: int) -> np.random.Generator:
    """Return the child stream at position ``key`` below ``root``.

    :param root: Root entropy from :func:`derive_root`.
    :type root: int
    :param key: Non-negative position indices.
    :type key: int
    :return: Independent generator for that position.
    :rtype: numpy.random.Generator
    """
    return np.random.default_rng(np.random.SeedSequence(root, spawn_key=tuple(key)))
