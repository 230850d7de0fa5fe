"""Named, order-independent random substreams derived from one root seed."""
from __future__ import annotations

import hashlib
import os

import numpy as np

SEED_ENV = "LANDMAP_SEED"


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def _key(part) -> int:
    digest = hashlib.blake2b(str(part).encode(), digest_size=4).digest()
    return int.from_bytes(digest, "little")


def substream(seed: int, *names) -> np.random.Generator:
    """Generator for the stream ``seed/names[0]/names[1]/...``.

    The same path always yields the same stream, independent of which other
    streams were created before it.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key(n) for n in names))
    return np.random.Generator(np.random.PCG64(ss))
