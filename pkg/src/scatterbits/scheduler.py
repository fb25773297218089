"""Look-Compute-Move execution under FSYNC and SSYNC schedulers.

One ``SimulationState`` per trial, stepped until scattered or timed out.
Every activated robot of a step observes the same pre-step configuration
(cycles are atomic); moves are applied together at the end of the step.
A round completes when every robot has been activated at least once
since the previous round boundary.

Two exact invariants are checked on every step: the multiplicity of a
point never increases (robots at distinct points remain distinct), and
every occupied point after the step hosts robots from a single origin.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .geometry import (Configuration, RationalPoint, SafeRegion,
                       SOLO_HALF_WIDTH, all_nearest_linf)
from .protocols import DestinationFunction, ProtocolView, SAProtocol
from .randomness import BitLedger, BitSource, uniform_index, weighted_index


class InvariantViolation(AssertionError):
    """A step broke the canonical-algorithm movement contract."""


class DetectionMode(enum.Enum):
    NONE = "none"
    WEAK_LOCAL = "weak-local"
    WEAK_GLOBAL = "weak-global"
    STRONG_LOCAL = "strong-local"
    STRONG_GLOBAL = "strong-global"

    @property
    def grants_own_info(self) -> bool:
        """Whether a robot can tell it is alone at its point.

        Every mode except NONE reveals the robot's own point status (a
        global map includes the observer's own position).
        """
        return self is not DetectionMode.NONE


def parse_mode(name: str) -> DetectionMode:
    for mode in DetectionMode:
        if mode.value == name:
            return mode
    raise ValueError(f"unknown detection mode {name!r}")


# ---------------------------------------------------------------------------
# scheduler policies
# ---------------------------------------------------------------------------

class SchedulerPolicy:
    """Chooses which robots run their cycle at each step (fair by design)."""

    name = "?"

    def select(self, state: "SimulationState", rng: random.Random) -> List[int]:
        raise NotImplementedError


class FSync(SchedulerPolicy):
    name = "fsync"

    def select(self, state: "SimulationState", rng: random.Random) -> List[int]:
        return list(range(state.n))


class SSyncAll(FSync):
    """All robots every step; identical activations to FSYNC."""

    name = "ssync-all"


class SSyncRoundRobin(SchedulerPolicy):
    """Blocks of ``block_size`` robots in id order, cycling."""

    def __init__(self, block_size: int):
        if block_size < 1:
            raise ValueError("block size must be >= 1")
        self.block_size = block_size
        self.name = f"ssync-rr:{block_size}"
        self._cursor = 0

    def select(self, state: "SimulationState", rng: random.Random) -> List[int]:
        n = state.n
        ids = [(self._cursor + i) % n for i in range(min(self.block_size, n))]
        self._cursor = (self._cursor + self.block_size) % n
        return ids


class SSyncRandom(SchedulerPolicy):
    """Each robot activated independently with probability p.

    Fairness is enforced structurally: an empty selection is redrawn, and
    any robot still unactivated after the horizon is force-activated.
    """

    def __init__(self, p_activate: float):
        if not 0 < p_activate <= 1:
            raise ValueError("activation probability must be in (0, 1]")
        self.p_activate = p_activate
        self.name = f"ssync-rand:{p_activate}"
        self.horizon = 8 * math.ceil(1 / p_activate) + 8

    def select(self, state: "SimulationState", rng: random.Random) -> List[int]:
        if state.steps_since_round_boundary >= self.horizon:
            pending = [i for i in range(state.n) if i not in state.activation_marks]
            if pending:
                return pending
        while True:
            ids = [i for i in range(state.n) if rng.random() < self.p_activate]
            if ids:
                return ids


def parse_policy(name: str) -> SchedulerPolicy:
    if name == "fsync":
        return FSync()
    if name == "ssync-all":
        return SSyncAll()
    if name.startswith("ssync-rr:"):
        return SSyncRoundRobin(int(name.split(":", 1)[1]))
    if name.startswith("ssync-rand:"):
        return SSyncRandom(float(name.split(":", 1)[1]))
    raise ValueError(f"unknown scheduler policy {name!r}")


# ---------------------------------------------------------------------------
# simulation state and stepping
# ---------------------------------------------------------------------------

@dataclass
class SimulationState:
    positions: List[RationalPoint]
    rng: BitSource
    ledger: BitLedger = field(default_factory=BitLedger)
    round_count: int = 0
    step_count: int = 0
    steps_since_round_boundary: int = 0
    activation_marks: set = field(default_factory=set)
    scheduler_rng: random.Random = field(default_factory=lambda: random.Random(0))
    #: optional adversarial partial-move schedule, cycled per activation;
    #: None means rigid moves (destinations always reached)
    move_fractions: Optional[Sequence[Fraction]] = None
    _activation_counter: int = 0
    terminated: bool = False

    def __post_init__(self) -> None:
        if not self.positions:
            raise ValueError("need at least one robot")
        self.terminated = self.config().is_scattered()

    @property
    def n(self) -> int:
        return len(self.positions)

    def config(self) -> Configuration:
        return Configuration(self.positions)


def _build_view(distinct: Tuple[RationalPoint, ...],
                counts: Dict[RationalPoint, int],
                self_position: RationalPoint,
                mode: DetectionMode) -> ProtocolView:
    flags = own_flag = own_count = full = None
    if mode is DetectionMode.WEAK_LOCAL:
        own_flag = counts[self_position] >= 2
    elif mode is DetectionMode.WEAK_GLOBAL:
        flags = {p: c >= 2 for p, c in counts.items()}
        own_flag = flags[self_position]
    elif mode is DetectionMode.STRONG_LOCAL:
        own_count = counts[self_position]
        own_flag = own_count >= 2
    elif mode is DetectionMode.STRONG_GLOBAL:
        full = dict(counts)
        own_count = counts[self_position]
        own_flag = own_count >= 2
    return ProtocolView(distinct_points=distinct, self_position=self_position,
                        multiplicity_flags=flags, own_flag=own_flag,
                        own_count=own_count, full_counts=full)


def step(state: SimulationState, protocol: DestinationFunction,
         mode: DetectionMode, policy: SchedulerPolicy) -> SimulationState:
    """Run one scheduler step in place (also returns the state)."""
    if state.terminated:
        raise ValueError("configuration is already scattered")

    active = policy.select(state, state.scheduler_rng)
    pre = list(state.positions)
    from collections import Counter
    counts: Dict[RationalPoint, int] = dict(Counter(pre))
    distinct = tuple(sorted(counts))

    movers = [r for r in active
              if not (mode.grants_own_info and counts[pre[r]] == 1)]

    regions: Dict[RationalPoint, SafeRegion] = {}
    if movers:
        sites = sorted({pre[r] for r in movers})
        if len(distinct) == 1:
            regions = {sites[0]: SafeRegion(sites[0], SOLO_HALF_WIDTH)}
        else:
            dists = all_nearest_linf(distinct, sites)
            regions = {p: SafeRegion(p, dists[p] / 3) for p in sites}

    moves: Dict[int, RationalPoint] = {}
    for robot in movers:
        p = pre[robot]
        view = _build_view(distinct, counts, p, mode)
        k = protocol.k_of(view)
        if protocol.poly_bound is not None:
            a, deg = protocol.poly_bound
            if k > a * state.n ** deg:
                raise InvariantViolation(
                    f"{protocol.identifier}: k={k} exceeds its declared "
                    f"polynomial bound {a}*n^{deg}")
        weights = protocol.weights_of(view)
        before = state.rng.bits_drawn
        if weights is None:
            option = uniform_index(state.rng, k)
        else:
            option = weighted_index(state.rng, weights)
        bits = state.rng.bits_drawn - before
        state.ledger.record(robot, state.round_count, bits, counts[p])
        dest = protocol.destination(view, regions[p], k, option)
        if state.move_fractions is not None:
            frac = state.move_fractions[
                state._activation_counter % len(state.move_fractions)]
            dest = RationalPoint(p.x + frac * (dest.x - p.x),
                                 p.y + frac * (dest.y - p.y))
        state._activation_counter += 1
        moves[robot] = dest

    post = list(pre)
    for robot, dest in moves.items():
        post[robot] = dest
    _check_step_invariants(pre, post, counts)

    state.positions = post
    state.step_count += 1
    state.steps_since_round_boundary += 1
    state.activation_marks.update(active)
    if len(state.activation_marks) == state.n:
        state.round_count += 1
        state.activation_marks.clear()
        state.steps_since_round_boundary = 0
    state.terminated = all(c == 1 for c in Counter(post).values())
    return state


def _check_step_invariants(pre: Sequence[RationalPoint],
                           post: Sequence[RationalPoint],
                           pre_counts: Dict[RationalPoint, int]) -> None:
    origins: Dict[RationalPoint, set] = {}
    loads: Dict[RationalPoint, int] = {}
    for robot, q in enumerate(post):
        origins.setdefault(q, set()).add(pre[robot])
        loads[q] = loads.get(q, 0) + 1
    for q, origin_set in origins.items():
        if len(origin_set) > 1:
            raise InvariantViolation(
                f"robots from distinct origins {sorted(origin_set)!r} "
                f"collided at {q!r}")
        (origin,) = origin_set
        if loads[q] > pre_counts[origin]:
            raise InvariantViolation(
                f"multiplicity at {q!r} grew beyond its origin {origin!r}")


# ---------------------------------------------------------------------------
# trial driver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    rounds_used: int
    total_bits: int
    per_robot_max_bits: int
    timed_out: bool
    seed: int
    n: int
    steps: int


def default_max_rounds(protocol: DestinationFunction, n: int) -> int:
    """Generous multiples of the expected bounds; a timeout signals a bug."""
    if isinstance(protocol, SAProtocol):
        return 64 * (2 * protocol.ffunction.f(n) + 8)
    log_n = max(1.0, math.log2(max(n, 2)))
    return max(64, math.ceil(64 * log_n * math.log2(math.log2(max(n, 2)) + 2)))


def run_to_scatter(state: SimulationState, protocol: DestinationFunction,
                   mode: DetectionMode, policy: SchedulerPolicy,
                   max_rounds: int) -> TrialRecord:
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    while not state.terminated and state.round_count < max_rounds:
        step(state, protocol, mode, policy)
    rounds = state.round_count + (1 if state.activation_marks else 0)
    return TrialRecord(rounds_used=rounds,
                       total_bits=state.ledger.total,
                       per_robot_max_bits=state.ledger.max_per_activation,
                       timed_out=not state.terminated,
                       seed=state.rng.seed,
                       n=state.n,
                       steps=state.step_count)
