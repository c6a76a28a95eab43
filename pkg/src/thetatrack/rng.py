"""Deterministic random streams.

All randomness comes from numpy's PCG64 bit generator. A (seed, stream-id)
pair fully determines a stream: the generator is seeded with
SeedSequence((seed, stream_id)). Stream ids:

    0  instance generation (point set, initial matching, scrambled hypothesis)
    1  evolver
    2  tracker

Separate evolver and tracker streams guarantee the evolver's choices cannot
depend on the tracker's random bits.
"""

import numpy as np

INSTANCE_STREAM = 0
EVOLVER_STREAM = 1
TRACKER_STREAM = 2


def make_rng(seed: int, stream: int) -> np.random.Generator:
    """PCG64 generator fully determined by (seed, stream)."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, stream))))


class IntDraws:
    """Buffered uniform integer draws from a Generator.

    Serves ints in [0, n) one at a time, drawing blocks under the hood so the
    hot loops avoid per-call Generator overhead. The sequence is a pure
    function of the generator state and n.
    """

    def __init__(self, rng: np.random.Generator, n: int, block: int = 4096):
        if n < 1:
            raise ValueError("n must be >= 1")
        self._rng = rng
        self._n = n
        self._block = block
        self._buf: list[int] = []
        self._pos = 0

    def __call__(self) -> int:
        if self._pos >= len(self._buf):
            self._buf = self._rng.integers(0, self._n, size=self._block).tolist()
            self._pos = 0
        v = self._buf[self._pos]
        self._pos += 1
        return v
