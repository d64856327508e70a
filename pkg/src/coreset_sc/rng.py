"""Seedable counter-based random streams shared by the whole toolkit."""

from __future__ import annotations

import numpy as np

__all__ = ["make_rng", "child_seeds"]


def _as_seed_seq(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def make_rng(seed) -> np.random.Generator:
    """A Philox (64-bit counter-based) generator; deterministic per seed."""
    return np.random.Generator(np.random.Philox(_as_seed_seq(seed)))


def child_seeds(seed, count: int) -> list[np.random.SeedSequence]:
    """Independent child streams for parallel or staged work."""
    return _as_seed_seq(seed).spawn(count)
