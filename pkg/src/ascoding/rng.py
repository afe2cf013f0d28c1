"""Seed derivation.

All derived randomness in the package flows through one splitting rule:
a stream identified by integer parts (seed, index, ...) is the generator
seeded with that tuple as SeedSequence entropy. This keeps chains, restarts,
and trials reproducible across platforms from a single master seed.
"""
from __future__ import annotations

import numpy as np

__all__ = ["derive_rng", "derive_seed"]


def derive_rng(*parts: int) -> np.random.Generator:
    return np.random.default_rng(list(parts))


def derive_seed(*parts: int) -> int:
    """Collapse a stream identifier to a single integer seed."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint64)[0])
