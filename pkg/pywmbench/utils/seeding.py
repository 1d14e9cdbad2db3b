import hashlib
import numpy as np

MAX_SEED = 2 ** 64


def hash64(*parts) -> int:
    """
    Stable 64-bit hash of the given parts. Used to derive per-utterance and per-cell seeds so that
    every random draw is a pure function of (global_seed, utterance_index, ...).

    Python's built-in hash() is salted per process and can't be used for this.
    """
    digest = hashlib.blake2b(repr(parts).encode('utf-8'), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_rng(*parts) -> np.random.Generator:
    return np.random.default_rng(hash64(*parts))
