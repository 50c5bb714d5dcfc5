"""Counter-based random streams.

Every task draws from ``stream(seed, *path)``: a generator keyed by the master
seed and a task path, so results do not depend on execution order or on how
many workers share the work.
"""

import hashlib

import numpy as np


def _word(part):
    if isinstance(part, (int, np.integer)) and not isinstance(part, bool):
        if part < 0:
            raise ValueError("stream path integers must be non-negative")
        return int(part)
    digest = hashlib.blake2b(str(part).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def seed_sequence(seed, *path):
    return np.random.SeedSequence(int(seed), spawn_key=tuple(_word(p) for p in path))


def stream(seed, *path):
    """Independent ``numpy.random.Generator`` for ``(seed, *path)``."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *path)))


def as_generator(rng):
    """Coerce ``None``, an int seed or a Generator into a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
