"""Scattering protocols: destination-count functions and their layouts.

Each protocol maps an observed view to a number of candidate destinations
k (possibly weighted, i.e. a multiset) inside the observing robot's safe
region.  k depends only on the view, so all robots sharing a point agree
on the same destination set.

The SA family is parameterized by an "F-function": a non-decreasing
surjective map on the naturals, with f_inverse(y) = max{x : f(x) = y}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .geometry import RationalPoint, SafeRegion, destination_at


class MissingDetection(ValueError):
    """The active detection mode does not provide what the protocol needs."""


class NonDiverging(ValueError):
    """g appears constant over the configured search horizon."""


class UnrepresentableValue(OverflowError):
    """The requested value is a tower too large to materialize."""


# ---------------------------------------------------------------------------
# views
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProtocolView:
    """What one robot observes, filtered by the detection mode.

    Fields beyond distinct_points/self_position are None unless the mode
    grants them.
    """

    distinct_points: Tuple[RationalPoint, ...]
    self_position: RationalPoint
    multiplicity_flags: Optional[Dict[RationalPoint, bool]] = None
    own_flag: Optional[bool] = None
    own_count: Optional[int] = None
    full_counts: Optional[Dict[RationalPoint, int]] = None


# ---------------------------------------------------------------------------
# F-functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FFunction:
    """A non-decreasing surjective map f with its max-inverse."""

    name: str
    f: Callable[[int], int]
    f_inverse: Callable[[int], int]


def _floor_log2(x: int) -> int:
    return x.bit_length() - 1 if x >= 1 else 0


def f_loglog() -> FFunction:
    """f = floor(log2) twice, with f(1) = f(2) = f(3) = 0.

    f(x) = y  <=>  2^(2^y) <= x < 2^(2^(y+1))  for y >= 1, hence
    f_inverse(y) = 2^(2^(y+1)) - 1 and f_inverse(0) = 3.
    """

    def f(x: int) -> int:
        return _floor_log2(_floor_log2(x))

    def f_inverse(y: int) -> int:
        if y < 0:
            raise ValueError("y must be >= 0")
        if y == 0:
            return 3
        return (1 << (1 << (y + 1))) - 1

    return FFunction("loglog", f, f_inverse)


def f_logstar() -> FFunction:
    """Iterated floor(log2): the number of halvings of the exponent to reach 1."""

    def f(x: int) -> int:
        count = 0
        while x > 1:
            x = _floor_log2(x)
            count += 1
        return count

    def f_inverse(y: int) -> int:
        # max{x : f(x) = y} satisfies x_0 = 1, x_{y} = 2^(x_{y-1}+1) - 1
        if y < 0:
            raise ValueError("y must be >= 0")
        x = 1
        for _ in range(y):
            if x >= 1 << 22:
                raise UnrepresentableValue(
                    f"level-{y} iterated-log inverse does not fit in memory")
            x = (1 << (x + 1)) - 1
        return x

    return FFunction("logstar", f, f_inverse)


#: Diagonal of the 2-based hyperoperation ladder: 2, 2^^2, 2^^4, 2^^65536, ...
#: Only the representable prefix is tabulated; beyond it the inverse raises.
_ACKERMANN_DIAGONAL = [2, 4, 65536]


def f_inv_ackermann() -> FFunction:
    def f(x: int) -> int:
        count = 0
        for a in _ACKERMANN_DIAGONAL:
            if x >= a:
                count += 1
        return count

    def f_inverse(y: int) -> int:
        if y < 0:
            raise ValueError("y must be >= 0")
        if y == 0:
            return _ACKERMANN_DIAGONAL[0] - 1
        if y < len(_ACKERMANN_DIAGONAL):
            return _ACKERMANN_DIAGONAL[y] - 1
        raise UnrepresentableValue(
            f"inverse-Ackermann level {y} is a tower of height 65536 or more")

    return FFunction("invack", f, f_inverse)


def f_from_g(g: Callable[[int], int], name: str = "from_g",
             horizon: int = 1 << 20) -> FFunction:
    """Squash an arbitrary diverging g into an F-function.

    f(0) = 0 and f(x) = min(max(g(x), f(x-1)), f(x-1) + 1), memoized.
    The transform is the identity on maps that are already F-functions.
    """

    memo: List[int] = [0]

    def f(x: int) -> int:
        if x < 0:
            raise ValueError("x must be >= 0")
        while len(memo) <= x:
            i = len(memo)
            prev = memo[-1]
            memo.append(min(max(g(i), prev), prev + 1))
        return memo[x]

    def f_inverse(y: int) -> int:
        if y < 0:
            raise ValueError("y must be >= 0")
        # smallest x with f(x) > y, found by doubling then bisection
        hi = 1
        while f(hi) <= y:
            hi *= 2
            if hi > horizon:
                raise NonDiverging(
                    f"f never exceeds {y} for x <= {horizon}; g may not diverge")
        lo = hi // 2
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            if f(mid) <= y:
                lo = mid
            else:
                hi = mid
        if f(lo) != y:
            raise ValueError(f"{y} is not attained by f")
        return lo

    return FFunction(name, f, f_inverse)


# ---------------------------------------------------------------------------
# destination functions
# ---------------------------------------------------------------------------

class DestinationFunction:
    """Base protocol: a view-determined destination count plus a lattice layout."""

    identifier: str = "?"
    #: detection requirement: None, "strong_local" or "strong_global"
    requires: Optional[str] = None
    #: (A, K) such that k <= A * n^K, or None when k is not polynomial in n
    poly_bound: Optional[Tuple[int, int]] = None

    def k_of(self, view: ProtocolView) -> int:
        raise NotImplementedError

    def weights_of(self, view: ProtocolView) -> Optional[List[int]]:
        return None

    def destination(self, view: ProtocolView, region: SafeRegion,
                    k: int, option: int) -> RationalPoint:
        return destination_at(region, k, option)


class DP2(DestinationFunction):
    """Two fresh destinations, chosen with a single fair bit."""

    identifier = "dp2"
    poly_bound = (2, 0)

    def k_of(self, view: ProtocolView) -> int:
        return 2


class DP2Biased(DestinationFunction):
    """Stay with probability 3/4, move with probability 1/4.

    Equivalent to a uniform pick from the multiset {stay, stay, stay, move},
    so every choice costs exactly 2 bits.
    """

    identifier = "dp2-biased"
    poly_bound = (4, 0)

    def k_of(self, view: ProtocolView) -> int:
        return 2

    def weights_of(self, view: ProtocolView) -> Optional[List[int]]:
        return [3, 1]

    def destination(self, view: ProtocolView, region: SafeRegion,
                    k: int, option: int) -> RationalPoint:
        if option == 0:
            return view.self_position
        return destination_at(region, 2, 1)


class ClementGlobal(DestinationFunction):
    """k = 2 n^2 where n is the total robot count (strong global detection)."""

    identifier = "clement-global"
    requires = "strong_global"
    poly_bound = (2, 2)

    def k_of(self, view: ProtocolView) -> int:
        if view.full_counts is None:
            raise MissingDetection("clement-global needs strong global detection")
        n = sum(view.full_counts.values())
        return 2 * n * n


class ClementLocal(DestinationFunction):
    """k = 2 |P|^2 where |P| is the robot's own multiplicity (strong local)."""

    identifier = "clement-local"
    requires = "strong_local"
    poly_bound = (2, 2)

    def k_of(self, view: ProtocolView) -> int:
        if view.own_count is None:
            raise MissingDetection("clement-local needs strong local detection")
        return 2 * view.own_count * view.own_count


class SAProtocol(DestinationFunction):
    """The SA_f family: k = max(8 N^3, 16 x^4, u^3) with x = f_inverse(f(u)+1).

    Needs no multiplicity detection; k can exceed 64 bits and is kept as
    an arbitrary-precision integer throughout.
    """

    def __init__(self, ffunction: FFunction, script_n: int = 2):
        if script_n < 1:
            raise ValueError("script_n must be >= 1")
        self.ffunction = ffunction
        self.script_n = script_n
        self.identifier = f"sa:{ffunction.name}"

    def k_of(self, view: ProtocolView) -> int:
        u = len(view.distinct_points)
        x = self.ffunction.f_inverse(self.ffunction.f(u) + 1)
        return max(8 * self.script_n ** 3, 16 * x ** 4, u ** 3)


_FFUNCTION_FACTORIES = {
    "loglog": f_loglog,
    "logstar": f_logstar,
    "invack": f_inv_ackermann,
}

PROTOCOL_NAMES = ("dp2", "dp2-biased", "clement-global", "clement-local",
                  "sa:loglog", "sa:logstar", "sa:invack")


def parse_protocol(name: str, script_n: int = 2) -> DestinationFunction:
    """Resolve a protocol-selection string from the CLI grammar."""
    if name == "dp2":
        return DP2()
    if name == "dp2-biased":
        return DP2Biased()
    if name == "clement-global":
        return ClementGlobal()
    if name == "clement-local":
        return ClementLocal()
    if name.startswith("sa:"):
        key = name[3:]
        if key in _FFUNCTION_FACTORIES:
            return SAProtocol(_FFUNCTION_FACTORIES[key](), script_n)
    raise ValueError(f"unknown protocol {name!r}; expected one of {PROTOCOL_NAMES}")
