"""Deterministic random-stream derivation for reproducible (parallel) runs.

Streams are derived from integer paths via a splittable seed sequence feeding
a counter-based Philox generator, so a (base_seed, design, T, replication)
tuple always yields the same stream regardless of scheduling or worker count.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed_sequence(*path: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(p) & _MASK64 for p in path])


def derive_rng(*path: int) -> np.random.Generator:
    """Philox generator keyed by the integer path."""
    key = derive_seed_sequence(*path).generate_state(2, np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def fresh_seed(rng: np.random.Generator) -> int:
    """Draw a 63-bit seed usable as the root of a derived stream family."""
    return int(rng.integers(0, 2**63 - 1, dtype=np.int64))


def as_generator(seed=None) -> np.random.Generator:
    """Coerce None, an int seed, or a Generator into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
