"""Seeded, labeled random streams.

Every random quantity in the tracker is drawn from a :class:`KeyedStream`
identified by a root seed plus a tuple of labels, e.g.
``KeyedStream(7).child("filter", 12, "survive")``.  Per-particle noise is
drawn row by row from a counter-based Philox generator, so row ``i`` only
depends on ``(key, i)``.  Splitting a particle range across threads therefore
reproduces the single-threaded draw bit for bit.
"""

from __future__ import annotations

import hashlib
from typing import Union

import numpy as np
from scipy.special import ndtri

_ROW_WIDTH = 4  # one Philox counter block = four 64-bit words
_TWO_M53 = 2.0 ** -53


def derive_seed(seed: int, *labels) -> int:
    """Hash a root seed and labels into a 128-bit integer key."""
    text = repr((int(seed),) + tuple(labels)).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=16).digest(), "little")


class KeyedStream:
    """Counter-based random stream keyed by ``(seed, *labels)``."""

    __slots__ = ("seed", "labels", "key")

    def __init__(self, seed: int, *labels):
        self.seed = int(seed)
        self.labels = tuple(labels)
        self.key = derive_seed(self.seed, *self.labels)

    def __repr__(self) -> str:
        return f"KeyedStream({self.seed}, *{self.labels!r})"

    def child(self, *labels) -> "KeyedStream":
        return KeyedStream(self.seed, *(self.labels + labels))

    def uniform_rows(self, start: int, stop: int) -> np.ndarray:
        """Rows ``start..stop-1`` of a (n, 4) array of uniforms in (0, 1)."""
        n = max(int(stop) - int(start), 0)
        bg = np.random.Philox(key=self.key)
        if start:
            bg.advance(int(start))
        raw = bg.random_raw(n * _ROW_WIDTH).reshape(n, _ROW_WIDTH)
        return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53

    def normal_rows(self, start: int, stop: int) -> np.ndarray:
        """Standard normal rows; row ``i`` is a fixed function of ``(key, i)``."""
        return ndtri(self.uniform_rows(start, stop))

    def generator(self) -> np.random.Generator:
        """A sequential generator for draws that are not per particle."""
        return np.random.Generator(np.random.Philox(key=derive_seed(self.seed, *self.labels, "seq")))


RandomLike = Union[KeyedStream, np.random.Generator, int]


def as_stream(rng: RandomLike) -> KeyedStream:
    if isinstance(rng, KeyedStream):
        return rng
    if isinstance(rng, np.random.Generator):
        return KeyedStream(int(rng.integers(2**63)))
    return KeyedStream(int(rng))


def as_generator(rng: RandomLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, KeyedStream):
        return rng.generator()
    return np.random.default_rng(int(rng))
