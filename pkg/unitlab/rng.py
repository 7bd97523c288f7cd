"""Seeded random streams.

Each run owns one :class:`RngStream`; trial seeds are derived from a master
seed so that any single trial can be replayed on its own.
"""

import logging
from typing import Sequence, TypeVar

import numpy as np
from attr import define, field

LOG = logging.getLogger(__name__)

T = TypeVar("T")

_INT64_LIMIT = 2**63 - 1


def derive_seed(master: int, counter: int) -> int:
    """The 64-bit seed of trial ``counter`` under ``master``."""
    if master < 0 or counter < 0:
        raise ValueError("seeds and counters must be nonnegative")
    seq = np.random.SeedSequence(entropy=master, spawn_key=(counter,))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


@define
class RngStream:
    """A deterministic source of uniform integers.

    The same seed always yields the same sequence of draws; ``counter`` is the
    number of draws taken so far.
    """

    seed: int
    counter: int = field(default=0, init=False)
    _generator: np.random.Generator = field(init=False, repr=False)

    def __attrs_post_init__(self) -> None:
        if self.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {self.seed}")
        self._generator = np.random.Generator(np.random.PCG64(self.seed))

    def below(self, n: int) -> int:
        """A uniform integer in ``[0, n)``."""
        if n <= 0:
            raise ValueError(f"empty range [0, {n})")
        if n > _INT64_LIMIT:
            raise ValueError(f"range [0, {n}) exceeds 64-bit draws")
        self.counter += 1
        return int(self._generator.integers(0, n))

    def coin(self) -> bool:
        return self.below(2) == 1

    def choice(self, items: Sequence[T]) -> T:
        return items[self.below(len(items))]

    def spawn(self, counter: int) -> "RngStream":
        """An independent stream for sub-task ``counter``."""
        return RngStream(derive_seed(self.seed, counter))
