"""Reproducible step streams.

Each ``(seed, stream_index)`` pair owns a Philox-4x64 counter-based generator
keyed through :class:`numpy.random.SeedSequence` spawn keys, so worker
substreams never overlap.  Only ``random_raw`` output is used, whose bit
sequence numpy keeps fixed across versions and platforms.  Every raw 64-bit
word yields two 32-bit draws, each mapped to ``[0, m)`` by ``(u * m) >> 32``
(one draw per step, bias below ``m / 2**32``).
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError

DEFAULT_BLOCK = 1 << 22
_MASK32 = np.uint64(0xFFFFFFFF)


class StepStream:
    """Buffered source of step codes for a ``d``-dimensional walk.

    A step code ``c`` in ``[0, 2d)`` means axis ``c >> 1``, direction ``+1`` when
    ``c`` is even and ``-1`` when odd.
    """

    def __init__(self, seed: int, stream_index: int = 0, d: int = 1, block: int = DEFAULT_BLOCK):
        if d < 1:
            raise DomainError("dimension must be >= 1")
        if seed < 0 or stream_index < 0:
            raise DomainError("seed and stream index must be nonnegative")
        self.seed = int(seed)
        self.stream_index = int(stream_index)
        self.d = d
        self.block = int(block)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_index,))
        self._bitgen = np.random.Philox(ss)
        self.buffer = np.empty(0, dtype=np.uint8)
        self.offset = 0

    def raw32(self, n: int) -> np.ndarray:
        """Next ``n`` 32-bit draws (as uint64), low half of each word first."""
        words = self._bitgen.random_raw((n + 1) // 2)
        out = np.empty(2 * words.size, dtype=np.uint64)
        out[0::2] = words & _MASK32
        out[1::2] = words >> np.uint64(32)
        return out[:n]

    def codes(self, n: int, m: int | None = None) -> np.ndarray:
        m = 2 * self.d if m is None else m
        return ((self.raw32(n) * np.uint64(m)) >> np.uint64(32)).astype(np.uint8)

    def refill(self) -> np.ndarray:
        """Replace the buffer with the next block of step codes."""
        self.buffer = self.codes(self.block)
        self.offset = 0
        return self.buffer

    def exhausted(self) -> bool:
        return self.offset >= self.buffer.size

    def draw(self) -> int:
        if self.exhausted():
            self.refill()
        c = int(self.buffer[self.offset])
        self.offset += 1
        return c


def step_vector(code: int, d: int) -> tuple[int, ...]:
    e = [0] * d
    e[code >> 1] = 1 if code % 2 == 0 else -1
    return tuple(e)


def draw_step(stream: StepStream, d: int | None = None) -> tuple[int, ...]:
    """Uniform draw from the 2d signed unit vectors; consumes one stream entry."""
    d = stream.d if d is None else d
    return step_vector(stream.draw(), d)
