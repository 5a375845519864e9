"""Seed derivation.

All randomness flows from integer seeds. Child seeds are derived with
numpy's ``SeedSequence`` (entropy = master seed, spawn key = the index
path), which is a documented, platform-independent hash. Generators are
``PCG64`` instances, so a seed pins the exact stream on every platform.
"""
import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(master, *keys):
    """Mix ``master`` with a path of non-negative integer ``keys`` into a 64-bit seed."""
    seq = np.random.SeedSequence(entropy=int(master) & _MASK64,
                                 spawn_key=tuple(int(k) for k in keys))
    lo, hi = seq.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


def generator(seed):
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))
