"""
Seeded, counter-based random streams.
"""
import hashlib

import numpy as np

_SEED_MASK = (1 << 64) - 1


def derive_seed(seed, label):
    """Deterministically derive a 64-bit child seed from a parent seed and a label."""
    digest = hashlib.blake2b(f"{seed}/{label}".encode('utf-8'), digest_size=8).digest()
    return int.from_bytes(digest, 'little')


class SeededRng:
    """
    A Philox stream keyed by a 64-bit seed.

    The same seed and the same sequence of calls give bit-identical draws. ``fork(label)``
    returns an independent stream that depends only on this stream's seed and the label,
    never on how many draws were taken before.
    """

    def __init__(self, seed):
        self.seed = int(seed) & _SEED_MASK
        self._gen = np.random.Generator(np.random.Philox(key=self.seed))

    def fork(self, label):
        return SeededRng(derive_seed(self.seed, label))

    def uniform(self, shape=None, low=0.0, high=1.0):
        return self._gen.uniform(low, high, size=shape)

    def integers(self, low, high=None, size=None):
        """Integers in [low, high) (or [0, low) when high is omitted)."""
        return self._gen.integers(low, high, size=size)

    def choice(self, n, p=None, size=None, replace=True):
        return self._gen.choice(n, p=p, size=size, replace=replace)

    def permutation(self, n):
        return self._gen.permutation(n)

    def normal(self, shape=None):
        return self._gen.standard_normal(size=shape)

    def __repr__(self):
        return f"SeededRng(seed={self.seed})"
