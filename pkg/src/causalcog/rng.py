"""Bit-reproducible pseudo-random numbers.

The generator is xoshiro256** (Blackman & Vigna) seeded through splitmix64.
Every random draw in the package goes through :class:`Xoshiro256`, so a seed
fixes all outputs on every platform.

Constants
---------
splitmix64 (seeding)::

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

The four 64-bit state words are the first four splitmix64 outputs for the
integer seed (reduced mod 2**64).

xoshiro256** (one output)::

    result = rotl(s1 * 5, 7) * 9
    t = s1 << 17
    s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3
    s2 ^= t
    s3 = rotl(s3, 45)

Derived draws
-------------
* ``random()``: ``(u64 >> 11) * 2**-53``, uniform on [0, 1).
* ``integers(high)``: ``floor(random() * high)``.
* ``categorical(p)``: smallest index ``k`` with ``u < cumsum(p)[k]``.
* ``standard_normal(n)``: Box-Muller on consecutive uniform pairs
  ``(u1, u2)``: ``sqrt(-2 log(1 - u1)) * (cos(2 pi u2), sin(2 pi u2))``.
"""
from __future__ import annotations

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

MASK64 = (1 << 64) - 1
_BUFFER = 4096


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state; return ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def _fill_py(state, out):
    s0, s1, s2, s3 = (int(v) for v in state)
    for k in range(out.shape[0]):
        r = ((s1 * 5) & MASK64)
        r = (((r << 7) | (r >> 57)) & MASK64) * 9 & MASK64
        out[k] = r
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & MASK64
    state[:] = np.array([s0, s1, s2, s3], dtype=np.uint64)


if numba is not None:

    @numba.njit(cache=True)
    def _fill(state, out):
        s0, s1, s2, s3 = state[0], state[1], state[2], state[3]
        for k in range(out.shape[0]):
            r = s1 * np.uint64(5)
            r = ((r << np.uint64(7)) | (r >> np.uint64(57))) * np.uint64(9)
            out[k] = r
            t = s1 << np.uint64(17)
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = (s3 << np.uint64(45)) | (s3 >> np.uint64(19))
        state[0] = s0
        state[1] = s1
        state[2] = s2
        state[3] = s3

else:  # pragma: no cover
    _fill = _fill_py


class Xoshiro256:
    """xoshiro256** stream. Outputs are buffered; the sequence is unaffected."""

    def __init__(self, seed: int = 0):
        sm = int(seed) & MASK64
        words = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            words.append(out)
        self._state = np.array(words, dtype=np.uint64)
        self._buf = np.empty(0, dtype=np.uint64)
        self._pos = 0

    def _take(self, n: int) -> np.ndarray:
        avail = self._buf.shape[0] - self._pos
        if n <= avail:
            out = self._buf[self._pos:self._pos + n]
            self._pos += n
            return out
        head = self._buf[self._pos:]
        need = n - avail
        fresh = np.empty(max(need, _BUFFER), dtype=np.uint64)
        _fill(self._state, fresh)
        self._buf = fresh
        self._pos = need
        return np.concatenate([head, fresh[:need]])

    def next_u64(self) -> int:
        return int(self._take(1)[0])

    def u64_array(self, n: int) -> np.ndarray:
        return self._take(int(n)).copy()

    def random(self, n: int | None = None):
        """Uniform draw(s) on [0, 1)."""
        if n is None:
            return float(int(self._take(1)[0]) >> 11) * 2.0 ** -53
        raw = self._take(int(n))
        return (raw >> np.uint64(11)).astype(np.float64) * 2.0 ** -53

    def integers(self, high: int, n: int | None = None):
        if n is None:
            return int(self.random() * high)
        return (self.random(n) * high).astype(np.int64)

    def categorical(self, probs, n: int | None = None):
        if n is None:
            # scalar path: same sequential cumulative sum as np.cumsum
            u = self.random()
            acc, pick, last = 0.0, None, 0
            for k, p in enumerate(np.asarray(probs, dtype=np.float64).tolist()):
                acc += p
                if p > 0:
                    last = k
                if pick is None and u < acc:
                    pick = k
            return last if pick is None else min(pick, last)
        cdf = np.cumsum(np.asarray(probs, dtype=np.float64))
        last = int(np.flatnonzero(np.asarray(probs) > 0)[-1])
        idx = np.searchsorted(cdf, self.random(n), side="right")
        return np.minimum(idx, last)

    def standard_normal(self, n: int) -> np.ndarray:
        pairs = (int(n) + 1) // 2
        u = self.random(2 * pairs).reshape(pairs, 2)
        radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        angle = 2.0 * np.pi * u[:, 1]
        z = np.column_stack([radius * np.cos(angle), radius * np.sin(angle)]).ravel()
        return z[:n]

    def spawn(self) -> "Xoshiro256":
        """Independent child stream seeded from the next output."""
        return Xoshiro256(self.next_u64())


def as_generator(seed) -> Xoshiro256:
    """Accept an integer seed or an existing generator."""
    if isinstance(seed, Xoshiro256):
        return seed
    return Xoshiro256(int(seed))
