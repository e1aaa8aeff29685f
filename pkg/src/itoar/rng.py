"""Portable seeded generator for reproducible test instances.

A 64-bit linear congruential generator, ``x <- a x + c mod 2^64`` with
Knuth's MMIX constants.  Uniform doubles are built from the top 53 bits, so
the stream can be reproduced in any language with 64-bit unsigned integers.
"""

import numpy as np

LCG_A = 6364136223846793005
LCG_C = 1442695040888963407
_MASK = (1 << 64) - 1


class Lcg64:
    def __init__(self, seed=0):
        self.state = int(seed) & _MASK

    def next_u64(self):
        self.state = (LCG_A * self.state + LCG_C) & _MASK
        return self.state

    def random(self, size=None):
        """Uniform samples in ``[0, 1)``."""
        if size is None:
            return (self.next_u64() >> 11) * 2.0**-53
        count = int(np.prod(size))
        out = np.fromiter(((self.next_u64() >> 11) for _ in range(count)), dtype=np.float64, count=count)
        return (out * 2.0**-53).reshape(size)

    def uniform(self, low=-1.0, high=1.0, size=None):
        """Uniform samples in ``[low, high)``; arrays are filled in row-major order."""
        return low + (high - low) * self.random(size)


def random_instance(n, seed=0):
    """Dense ``(A, B, r_m1, r_0)`` with entries uniform on ``[-1, 1)``, drawn in that order."""
    g = Lcg64(seed)
    A = g.uniform(size=(n, n))
    B = g.uniform(size=(n, n))
    r_m1 = g.uniform(size=n)
    r_0 = g.uniform(size=n)
    return A, B, r_m1, r_0
