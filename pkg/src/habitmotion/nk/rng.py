"""Counter-based random streams derived from one global seed.

Every consumer asks for a stream by (seed, *labels); the labels are hashed
into a Philox key, so adding a new component or parameter never perturbs
the streams of existing ones.
"""

import hashlib

import numpy as np


def rng_for(seed: int, *path) -> np.random.Generator:
    msg = repr((int(seed),) + tuple(str(p) for p in path)).encode()
    digest = hashlib.sha256(msg).digest()
    key = np.frombuffer(digest[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
