import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from scatterbits.geometry import (Configuration, IndexOutOfRange, RationalPoint,
                                  SafeRegion, SoloConfiguration, all_nearest_linf,
                                  destination_at, safe_region,
                                  safe_region_or_default, u_projection,
                                  voronoi_membership)


def pts(*coords):
    return [RationalPoint.of(x, y) for x, y in coords]


class TestUProjection:
    def test_deduplication(self):
        config = Configuration(pts((0, 0), (0, 0), (1, 0)))
        assert set(u_projection(config)) == {RationalPoint.of(0, 0),
                                            RationalPoint.of(1, 0)}

    def test_singleton(self):
        config = Configuration(pts((0, 0)))
        assert u_projection(config) == (RationalPoint.of(0, 0),)

    def test_counting(self):
        config = Configuration(pts(*([(0, 0)] * 3 + [(1, 0)] * 2 + [(0, 1)])))
        assert len(u_projection(config)) == 3
        assert config.n == 6
        assert sum(config.counts().values()) == 6


class TestSafeRegion:
    def test_third_of_unit_distance(self):
        config = Configuration(pts(*([(0, 0)] * 3 + [(1, 0)] * 2)))
        region = safe_region(config, RationalPoint.of(0, 0))
        assert region.half_width == Fraction(1, 3)

    def test_far_neighbor(self):
        config = Configuration(pts((0, 0), (0, 5)))
        region = safe_region(config, RationalPoint.of(0, 5))
        assert region.half_width == Fraction(5, 3)

    def test_linf_not_euclidean(self):
        config = Configuration(pts((0, 0), (3, 4)))
        region = safe_region(config, RationalPoint.of(0, 0))
        assert region.half_width == Fraction(4, 3)

    def test_solo_raises(self):
        config = Configuration(pts((0, 0), (0, 0)))
        with pytest.raises(SoloConfiguration):
            safe_region(config, RationalPoint.of(0, 0))
        fallback = safe_region_or_default(config, RationalPoint.of(0, 0))
        assert fallback.half_width == 1

    def test_unoccupied_point_rejected(self):
        config = Configuration(pts((0, 0), (1, 0)))
        with pytest.raises(ValueError):
            safe_region(config, RationalPoint.of(2, 2))


class TestVoronoiMembership:
    def test_closer_to_site(self):
        config = Configuration(pts((0, 0), (2, 0)))
        assert voronoi_membership(config, RationalPoint.of(0, 0),
                                  RationalPoint.of(Fraction(1, 2), 0))

    def test_bisector_tie_is_not_strict(self):
        config = Configuration(pts((0, 0), (2, 0)))
        assert not voronoi_membership(config, RationalPoint.of(0, 0),
                                      RationalPoint.of(1, 0))

    @pytest.mark.parametrize("k", [1, 2, 3, 7, 64, 1000])
    def test_all_destinations_inside_cell(self, k):
        config = Configuration(pts((0, 0), (2, 0), (0, 3), (-1, -1)))
        site = RationalPoint.of(0, 0)
        region = safe_region(config, site)
        for index in range(k):
            q = destination_at(region, k, index)
            assert region.contains(q)
            assert voronoi_membership(config, site, q)


class TestDestinationAt:
    def test_single_cell_interior(self):
        region = SafeRegion(RationalPoint.of(0, 0), Fraction(1))
        q = destination_at(region, 1, 0)
        assert q == RationalPoint.of(0, 0)  # 1x1 grid centers the point
        assert region.contains(q)

    def test_layout_formula_by_hand(self):
        # k=4 -> m=2; index 3 -> cell (1,1); offset = -hw + 2*hw*2/3 = hw/3
        region = SafeRegion(RationalPoint.of(0, 0), Fraction(1, 3))
        q = destination_at(region, 4, 3)
        assert q == RationalPoint.of(Fraction(1, 9), Fraction(1, 9))

    def test_lazy_for_huge_k(self):
        region = SafeRegion(RationalPoint.of(0, 0), Fraction(1))
        q = destination_at(region, 10**10, 10**9)
        assert region.contains(q)

    def test_index_out_of_range(self):
        region = SafeRegion(RationalPoint.of(0, 0), Fraction(1))
        with pytest.raises(IndexOutOfRange):
            destination_at(region, 4, 4)

    @pytest.mark.parametrize("k", [1, 2, 3, 5, 9, 100, 10_000])
    def test_injectivity(self, k):
        region = SafeRegion(RationalPoint.of(1, -2), Fraction(2, 7))
        seen = {destination_at(region, k, i) for i in range(k)}
        assert len(seen) == k

    def test_determinism(self):
        region = SafeRegion(RationalPoint.of(0, 0), Fraction(1, 3))
        assert destination_at(region, 17, 11) == destination_at(region, 17, 11)


coordinate = st.integers(min_value=0, max_value=99)
point_strategy = st.tuples(coordinate, coordinate).map(
    lambda t: RationalPoint.of(t[0], t[1]))


@settings(max_examples=40, deadline=None)
@given(st.lists(point_strategy, min_size=2, max_size=20),
       st.sampled_from([1, 2, 3, 10, 31, 100, 997]))
def test_destinations_stay_in_own_cell(points, k):
    config = Configuration(points)
    if len(config.distinct) < 2:
        return
    for site in config.distinct:
        region = safe_region(config, site)
        for index in range(0, k, max(1, k // 7)):
            q = destination_at(region, k, index)
            assert voronoi_membership(config, site, q)


@settings(max_examples=30, deadline=None)
@given(st.lists(point_strategy, min_size=2, max_size=12), st.integers(1, 50))
def test_disjointness_across_sites(points, k):
    config = Configuration(points)
    if len(config.distinct) < 2:
        return
    seen = {}
    for site in config.distinct:
        region = safe_region(config, site)
        for index in range(k):
            q = destination_at(region, k, index)
            assert seen.setdefault(q, site) == site
    assert len(seen) == k * len(config.distinct)


def test_bulk_nearest_matches_naive():
    points = [RationalPoint.of(x, y) for x in range(20) for y in range(15)]
    bulk = all_nearest_linf(points)
    for p in points[:40]:
        naive = min(p.linf_distance(q) for q in points if q != p)
        assert bulk[p] == naive


def test_bulk_nearest_kdtree_path():
    # > 128 points forces the kd-tree prefilter; include a float-coincident
    # cluster to exercise the exact tie-break
    eps = Fraction(1, 10**30)
    points = [RationalPoint.of(x, y) for x in range(15) for y in range(15)]
    cluster = [RationalPoint(Fraction(5) + i * eps, Fraction(5)) for i in (1, 2, 5)]
    allpts = points + cluster
    bulk = all_nearest_linf(allpts)
    for p in cluster + points[:20]:
        naive = min(p.linf_distance(q) for q in allpts if q != p)
        assert bulk[p] == naive
    assert bulk[cluster[0]] == eps
