"""Exact rational planar geometry for robot configurations.

Positions are pairs of ``fractions.Fraction``, so equality and distance
comparisons are exact and multiplicity detection is never subject to
floating point noise.  Destination sets are never materialized: a safe
region plus an index is enough to produce any of its k lattice points in
O(1) arithmetic.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Sequence, Tuple

RationalLike = int | Fraction | str


class SoloConfiguration(ValueError):
    """Raised when a safe region is requested but only one point is occupied."""


class IndexOutOfRange(IndexError):
    """Destination index is not in [0, k)."""


@dataclass(frozen=True, order=True)
class RationalPoint:
    """A point of the plane with exact rational coordinates."""

    x: Fraction
    y: Fraction

    @staticmethod
    def of(x: RationalLike, y: RationalLike) -> "RationalPoint":
        return RationalPoint(Fraction(x), Fraction(y))

    def linf_distance(self, other: "RationalPoint") -> Fraction:
        return max(abs(self.x - other.x), abs(self.y - other.y))

    def squared_distance(self, other: "RationalPoint") -> Fraction:
        dx = self.x - other.x
        dy = self.y - other.y
        return dx * dx + dy * dy

    def __repr__(self) -> str:  # compact, e.g. (1/3, -2)
        return f"({self.x}, {self.y})"


ORIGIN = RationalPoint.of(0, 0)


class Configuration:
    """A multiset of robot positions.

    The entries are stored as given (one per robot); the deduplicated set
    U(C) is exposed in a canonical lexicographic order so that downstream
    computations are reproducible.
    """

    __slots__ = ("positions", "_counts", "_distinct")

    def __init__(self, positions: Iterable[RationalPoint]):
        self.positions: Tuple[RationalPoint, ...] = tuple(positions)
        if not self.positions:
            raise ValueError("a configuration needs at least one robot")
        self._counts: Dict[RationalPoint, int] = dict(Counter(self.positions))
        self._distinct: Tuple[RationalPoint, ...] = tuple(sorted(self._counts))

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def distinct(self) -> Tuple[RationalPoint, ...]:
        return self._distinct

    def multiplicity(self, p: RationalPoint) -> int:
        return self._counts.get(p, 0)

    def counts(self) -> Dict[RationalPoint, int]:
        return dict(self._counts)

    def is_scattered(self) -> bool:
        return all(c == 1 for c in self._counts.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return sorted(self.positions) == sorted(other.positions)

    def __repr__(self) -> str:
        return f"Configuration({list(self.positions)!r})"


def u_projection(config: Configuration) -> Tuple[RationalPoint, ...]:
    """The deduplicated set U(C), in canonical order."""
    return config.distinct


@dataclass(frozen=True)
class SafeRegion:
    """Axis-aligned square around an occupied point.

    With half_width = d_inf / 3 (d_inf the L-infinity distance to the
    nearest other occupied point), every point q of the square satisfies
    |q - center|_2 <= (d_inf/3) * sqrt(2) < d_inf / 2 <= d_2 / 2, hence q
    is strictly closer to center than to any other occupied point.  All
    of it stays in rational arithmetic; no square roots are ever taken.
    """

    center: RationalPoint
    half_width: Fraction

    def __post_init__(self) -> None:
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")

    def contains(self, q: RationalPoint) -> bool:
        return (abs(q.x - self.center.x) <= self.half_width
                and abs(q.y - self.center.y) <= self.half_width)


#: Half-width used when only one point is occupied (any region works then).
SOLO_HALF_WIDTH = Fraction(1)


def nearest_linf_distance(config: Configuration, p: RationalPoint) -> Fraction:
    others = [q for q in config.distinct if q != p]
    if not others:
        raise SoloConfiguration("configuration has a single occupied point")
    return min(p.linf_distance(q) for q in others)


def safe_region(config: Configuration, p: RationalPoint) -> SafeRegion:
    """The square of half-width d_inf/3 around p.

    Raises SoloConfiguration when |U(C)| = 1; callers fall back to
    SOLO_HALF_WIDTH in that case.
    """
    if config.multiplicity(p) == 0:
        raise ValueError(f"{p!r} is not an occupied point")
    return SafeRegion(p, nearest_linf_distance(config, p) / 3)


def safe_region_or_default(config: Configuration, p: RationalPoint) -> SafeRegion:
    try:
        return safe_region(config, p)
    except SoloConfiguration:
        return SafeRegion(p, SOLO_HALF_WIDTH)


def voronoi_membership(config: Configuration, site: RationalPoint,
                       q: RationalPoint) -> bool:
    """True iff q is strictly closer to site than to every other occupied point."""
    if config.multiplicity(site) == 0:
        raise ValueError(f"{site!r} is not an occupied point")
    d_site = q.squared_distance(site)
    return all(d_site < q.squared_distance(other)
               for other in config.distinct if other != site)


def destination_at(region: SafeRegion, k: int, index: int) -> RationalPoint:
    """The index-th of k lattice destinations inside the region.

    Row-major layout on an m x m lattice with m = ceil(sqrt(k)); cell
    (i, j) sits at center + (-hw + 2hw(i+1)/(m+1), -hw + 2hw(j+1)/(m+1)).
    Injective in index, O(1) arithmetic even for astronomically large k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0 <= index < k:
        raise IndexOutOfRange(f"index {index} not in [0, {k})")
    m = math.isqrt(k)
    if m * m < k:
        m += 1
    i, j = index % m, index // m
    hw = region.half_width
    ox = -hw + 2 * hw * Fraction(i + 1, m + 1)
    oy = -hw + 2 * hw * Fraction(j + 1, m + 1)
    return RationalPoint(region.center.x + ox, region.center.y + oy)


# ---------------------------------------------------------------------------
# bulk nearest-neighbor support
#
# A simulation round needs d_inf for every site whose robots move.  The
# exact O(u^2) scan is fine for small u, but SA_f rounds can have
# thousands of distinct sites, so for large u we prune candidates with a
# float kd-tree first and settle the winner in exact arithmetic.  Sites
# closer than float resolution collapse to the same float point; the
# candidate ball then simply contains that whole (small) cluster and the
# exact comparison still decides.
# ---------------------------------------------------------------------------

_KDTREE_THRESHOLD = 128


def all_nearest_linf(points: Sequence[RationalPoint],
                     targets: Sequence[RationalPoint] | None = None,
                     ) -> Dict[RationalPoint, Fraction]:
    """d_inf to the nearest *other* point, for each target (default: all).

    Exact results; floats are only used to prune candidates.
    """
    if targets is None:
        targets = points
    if len(points) < 2:
        raise SoloConfiguration("need at least two distinct points")
    if len(points) <= _KDTREE_THRESHOLD:
        out: Dict[RationalPoint, Fraction] = {}
        for p in targets:
            out[p] = min(p.linf_distance(q) for q in points if q != p)
        return out
    return _all_nearest_linf_kdtree(points, targets)


def _all_nearest_linf_kdtree(points: Sequence[RationalPoint],
                             targets: Sequence[RationalPoint],
                             ) -> Dict[RationalPoint, Fraction]:
    import numpy as np
    from scipy.spatial import cKDTree

    coords = np.array([[float(p.x), float(p.y)] for p in points])
    tree = cKDTree(coords)
    scale = float(np.max(np.abs(coords))) or 1.0
    slack = scale * 1e-9
    index_of = {p: i for i, p in enumerate(points)}

    out: Dict[RationalPoint, Fraction] = {}
    for p in targets:
        i = index_of[p]
        dists, _ = tree.query(coords[i], k=2, p=np.inf)
        radius = float(dists[1]) * (1 + 1e-9) + slack
        candidates = tree.query_ball_point(coords[i], r=radius, p=np.inf)
        best: Fraction | None = None
        for j in candidates:
            q = points[j]
            if q == p:
                continue
            d = p.linf_distance(q)
            if best is None or d < best:
                best = d
        assert best is not None
        out[p] = best
    return out
