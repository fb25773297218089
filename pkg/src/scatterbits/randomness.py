"""Seeded entropy source with exact random-bit accounting.

Every draw goes through ``BitSource``, which counts raw bits consumed.
Uniform selection over k outcomes uses rejection sampling on fixed-width
words: w = ceil(log2 k) bits per attempt, retry while the value is >= k.
That keeps the distribution exactly uniform, costs at least ceil(log2 k)
bits per call, and less than 2(log2 k + 1) in expectation.

The ledger applies the accounting convention that bits drawn by robots
already alone at their point do not count.
"""

from __future__ import annotations

import hashlib
import random
from collections import defaultdict
from typing import Dict, List, Sequence, Tuple


class ZeroTotalWeight(ValueError):
    """All weights are zero; no outcome can be selected."""


class BitSource:
    """Deterministic bit stream with a monotone bits_drawn counter.

    Backed by the stdlib Mersenne Twister (period 2^19937 - 1); statistical
    quality is validated by the uniformity tests, not by generator choice.
    A source is single-owner: parallel trials each derive their own.
    """

    __slots__ = ("seed", "bits_drawn", "_rng")

    def __init__(self, seed: int):
        self.seed = seed
        self.bits_drawn = 0
        self._rng = random.Random(seed)

    def draw_bits(self, width: int) -> int:
        """Draw ``width`` raw bits, returned as an unsigned integer."""
        if width < 0:
            raise ValueError("width must be >= 0")
        if width == 0:
            return 0
        self.bits_drawn += width
        return self._rng.getrandbits(width)


def uniform_index(src: BitSource, k: int) -> int:
    """Exactly uniform over {0, ..., k-1}; supports arbitrary-precision k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return 0
    width = (k - 1).bit_length()
    while True:
        value = src.draw_bits(width)
        if value < k:
            return value


def weighted_index(src: BitSource, weights: Sequence[int]) -> int:
    """Index i with probability weights[i] / sum(weights).

    Realized as a uniform draw over the total weight followed by a bucket
    lookup, so the bit accounting is identical to uniform_index(total).
    """
    if not weights:
        raise ValueError("weights must be nonempty")
    if any(w < 0 for w in weights):
        raise ValueError("weights must be nonnegative")
    total = sum(weights)
    if total == 0:
        raise ZeroTotalWeight("all weights are zero")
    r = uniform_index(src, total)
    acc = 0
    for i, w in enumerate(weights):
        acc += w
        if r < acc:
            return i
    raise AssertionError("unreachable")


def derive_trial_seed(master_seed: int, *indices: int) -> int:
    """A documented, collision-resistant mix of (master_seed, indices).

    Trials of a batch get distinct, reproducible 64-bit seeds.
    """
    tag = ":".join(str(v) for v in (master_seed, *indices))
    digest = hashlib.sha256(tag.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


class BitLedger:
    """Per (robot, round) record of counted random bits.

    Bits are recorded only when the robot's Look-time multiplicity is
    at least 2; the caller passes that multiplicity so protocols stay
    oblivious to the accounting.
    """

    __slots__ = ("_entries",)

    def __init__(self) -> None:
        self._entries: Dict[Tuple[int, int], int] = {}

    def record(self, robot_id: int, round_index: int, bits: int,
               look_multiplicity: int) -> None:
        if bits < 0:
            raise ValueError("bits must be >= 0")
        if look_multiplicity < 2 or bits == 0:
            return
        key = (robot_id, round_index)
        self._entries[key] = self._entries.get(key, 0) + bits

    @property
    def total(self) -> int:
        return sum(self._entries.values())

    def robot_total(self, robot_id: int) -> int:
        return sum(b for (r, _), b in self._entries.items() if r == robot_id)

    def round_max(self, round_index: int) -> int:
        """Largest single-robot bit count within the given round."""
        per_robot: Dict[int, int] = defaultdict(int)
        for (r, rd), b in self._entries.items():
            if rd == round_index:
                per_robot[r] += b
        return max(per_robot.values(), default=0)

    @property
    def max_per_activation(self) -> int:
        """Most bits any robot used in a single (robot, round) entry."""
        return max(self._entries.values(), default=0)

    def entries(self) -> List[Tuple[int, int, int]]:
        return sorted((r, rd, b) for (r, rd), b in self._entries.items())
