"""Deterministic random streams.

A stream is a xoshiro256** generator whose four state words come from
splitmix64 applied to a 64-bit seed.  Equal seeds give equal sequences on
every platform; independent streams for sub-tasks are derived by hashing
(seed, label) pairs rather than by drawing, so adding a consumer never
shifts the values another consumer sees.
"""

import hashlib

import numpy as np
from numba import njit, uint64

_MASK64 = (1 << 64) - 1


def _splitmix64_next(x):
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x, (z ^ (z >> 31)) & _MASK64


@njit(cache=True)
def _fill_uint64(s0, s1, s2, s3, out):
    # xoshiro256**: Blackman & Vigna's public-domain recurrence.
    for i in range(out.shape[0]):
        r = s1 * uint64(5)
        r = ((r << uint64(7)) | (r >> uint64(57))) * uint64(9)
        out[i] = r
        t = s1 << uint64(17)
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = (s3 << uint64(45)) | (s3 >> uint64(19))
    return s0, s1, s2, s3


class RngStream:
    """Seeded generator with vectorized draws and labelled sub-streams."""

    def __init__(self, seed):
        seed = int(seed) & _MASK64
        self.seed = seed
        x = seed
        words = []
        for _ in range(4):
            x, w = _splitmix64_next(x)
            words.append(np.uint64(w))
        self._s = tuple(words)

    def child(self, label):
        """Derive an independent stream for (this seed, label)."""
        h = hashlib.blake2b(
            str(label).encode("utf-8"),
            digest_size=8,
            key=self.seed.to_bytes(8, "little"),
        )
        return RngStream(int.from_bytes(h.digest(), "little"))

    def uint64(self, n):
        """Next n raw 64-bit words as a uint64 array."""
        out = np.empty(int(n), dtype=np.uint64)
        s0, s1, s2, s3 = _fill_uint64(*self._s, out)
        self._s = (np.uint64(s0), np.uint64(s1), np.uint64(s2), np.uint64(s3))
        return out

    def uniform(self, n):
        """n doubles in [0, 1), 53-bit resolution."""
        return (self.uint64(n) >> np.uint64(11)) * 2.0**-53

    def normal(self, n):
        """n standard normal doubles via Box-Muller."""
        n = int(n)
        pairs = (n + 1) // 2
        # Shift into (0, 1] so the log is always finite.
        u = ((self.uint64(2 * pairs) >> np.uint64(11)) + 1) * 2.0**-53
        u1, u2 = u[:pairs], u[pairs:]
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
        return z[:n]

    def normal_plane(self, height, width):
        """Standard normal plane of shape (height, width)."""
        return self.normal(height * width).reshape(height, width)

    def integers(self, low, high, n):
        """n ints uniform on [low, high) via unbiased rejection."""
        low, high = int(low), int(high)
        if high <= low:
            raise ValueError("empty range")
        span = high - low
        nbits = max(span - 1, 1).bit_length()
        mask = np.uint64((1 << nbits) - 1)
        out = np.empty(int(n), dtype=np.int64)
        filled = 0
        while filled < n:
            cand = (self.uint64(2 * (n - filled) + 8) & mask).astype(np.int64)
            cand = cand[cand < span]
            take = min(cand.shape[0], n - filled)
            out[filled : filled + take] = cand[:take]
            filled += take
        return out + low

    def permutation(self, n):
        """Fisher-Yates permutation of range(n)."""
        perm = np.arange(int(n), dtype=np.int64)
        for i in range(int(n) - 1, 0, -1):
            j = int(self.integers(0, i + 1, 1)[0])
            perm[i], perm[j] = perm[j], perm[i]
        return perm

    def pick(self, seq):
        """One element chosen uniformly from a sequence."""
        return seq[int(self.integers(0, len(seq), 1)[0])]
