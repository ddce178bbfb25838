"""Self-contained deterministic PRNG.

SplitMix64: state advances by the odd constant 0x9E3779B97F4B7C15; each draw is
finalized with the xor-shift/multiply constants 0xBF58476D1CE4E5B9 and
0x94D049BB133111EB.  Floats take the top 53 bits, u = (z >> 11) * 2**-53.
The sequence for a given seed is fixed for the life of the package, so sampled
test cases and verification reports are reproducible from (seed, index) alone.
"""

import math

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4B7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """Deterministic 64-bit generator; one instance per sampling context."""

    def __init__(self, seed):
        self._x = int(seed) & _MASK

    def u64(self):
        self._x = (self._x + _GAMMA) & _MASK
        z = self._x
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def uniform(self, lo=0.0, hi=1.0):
        u = (self.u64() >> 11) * 2.0 ** -53
        return lo + (hi - lo) * u

    def normal(self):
        # Box-Muller; 1-u keeps the log argument in (0, 1].
        u1 = 1.0 - (self.u64() >> 11) * 2.0 ** -53
        u2 = (self.u64() >> 11) * 2.0 ** -53
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def integer(self, lo, hi):
        """Uniform integer in [lo, hi), by rejection on the top bits."""
        span = hi - lo
        if span <= 0:
            raise ValueError("empty range")
        limit = (_MASK + 1) - (_MASK + 1) % span
        while True:
            z = self.u64()
            if z < limit:
                return lo + z % span

    def spawn(self):
        """Child generator seeded from the stream (for per-case isolation)."""
        return SplitMix64(self.u64())
