from fractions import Fraction

import numpy as np
import pytest

from conftest import ladder_oracle, random_ladder_point
from horoboundary.spaces import geodesic_between, geodesic_ray_to


def test_rail_distance_far_apart(ladder):
    assert ladder.distance((0, 1), (3, 1)) == 3


def test_closed_formula_when_far_apart(ladder, rng):
    for _ in range(500):
        x, y = random_ladder_point(rng), random_ladder_point(rng)
        if abs(x[0] - y[0]) > 1:
            assert ladder.distance(x, y) == 2 + abs(x[0] - y[0]) - abs(x[1] + y[1])


def test_matches_graph_oracle_exactly(ladder, rng):
    for _ in range(500):
        x, y = random_ladder_point(rng), random_ladder_point(rng)
        d = ladder.distance(x, y)
        assert isinstance(d, (int, Fraction))
        assert d == ladder_oracle(x, y)


def test_short_range_pairs(ladder):
    # the completed formula for |a1 - a2| <= 1
    assert ladder.distance((0.5, 1), (0.5, -1)) == 3
    assert ladder.distance((Fraction(1, 4), 1), (Fraction(3, 4), -1)) == 3
    assert ladder.distance((1, 0), (1, 1)) == 1
    assert ladder.distance((1, 0), (2, 0)) == 3


def test_geodesic_through_a_rung(ladder):
    seg = geodesic_between(ladder, (0.5, 1), (0.5, -1))
    assert seg.length == 3
    assert ladder.distance(seg.point(0.5), (0, 1)) == 0
    assert seg.point(1.5)[0] == 0
    for s, t in [(0, 3), (0.25, 2.75), (1, 2)]:
        assert ladder.distance(seg.point(s), seg.point(t)) == pytest.approx(t - s, abs=1e-12)


def test_rail_ray(ladder):
    ray = geodesic_ray_to(ladder, (0, 1), 1)
    for t in (0, 1.5, 7):
        assert ray.point(t) == (t, 1)


def test_ray_to_the_end_follows_the_rail_of_the_start(ladder):
    ray = geodesic_ray_to(ladder, (2, -0.5), "end")
    ts = np.linspace(0, 20, 41)
    for s in ts:
        for t in ts:
            assert ladder.distance(ray.point(s), ray.point(t)) == pytest.approx(abs(t - s), abs=1e-12)
