"""Reproducible random streams.

Everything stochastic in this package draws from a :class:`SeedStream`,
a thin wrapper over numpy's counter-based Philox generator.  A stream is
identified by ``(seed, stream_id)``; identical identifiers reproduce
byte-identical draw sequences, distinct ``stream_id`` values jump to
disjoint 2**128-size counter blocks and are therefore statistically
independent.  There is no global RNG state anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    """One round of splitmix64; used to derive child stream ids."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class SeedStream:
    """Identifier of one reproducible random stream.

    seed      -- 64-bit experiment seed, shared by all streams of a run
    stream_id -- 64-bit stream index; replicas and internal sub-tasks use
                 distinct ids
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= int(self.seed) <= _MASK64):
            raise ValueError("seed must fit in 64 bits")
        if not (0 <= int(self.stream_id) <= _MASK64):
            raise ValueError("stream_id must fit in 64 bits")

    def generator(self) -> np.random.Generator:
        """Fresh numpy Generator positioned at this stream's counter block."""
        bitgen = np.random.Philox(key=int(self.seed))
        if self.stream_id:
            bitgen = bitgen.jumped(int(self.stream_id))
        return np.random.Generator(bitgen)

    def substream(self, index: int) -> "SeedStream":
        """Deterministically derived child stream.

        Child ids are produced by mixing ``(stream_id, index)`` through
        splitmix64, which keeps ids from structured loops (replica i,
        operator-internal draw j) from colliding with each other.
        """
        child = _splitmix64((int(self.stream_id) * 0x9E3779B97F4A7C15 + int(index) + 1) & _MASK64)
        return SeedStream(self.seed, child)

    def replicas(self, n: int) -> list["SeedStream"]:
        """n independent child streams, one per Monte Carlo replica."""
        return [self.substream(i) for i in range(n)]
