import math

import numpy as np
import pytest

from horoboundary.curves import ShiftedCurve
from horoboundary.errors import InconclusiveError
from horoboundary.horofunctions import busemann_many
from horoboundary.hyperbolicity import (NotStronglyAsymptotic, ShiftPair, Status, asymptotic,
                                        delta_estimate, extract_shifts, goes_to_infinity,
                                        gromov_product, interpolate_discrete, is_quasigeodesic,
                                        strong_asymptoticity_gap)
from horoboundary.spaces import FiniteGraph, PoincareDisc


def test_gromov_product_trivial_cases(disc):
    assert gromov_product(disc, 0.3, 0.3, 0.1j) == pytest.approx(disc.distance(0.3, 0.1j))
    assert gromov_product(disc, 0.1j, 0.7, 0.1j) == 0


def test_gromov_product_ladder(ladder):
    assert gromov_product(ladder, (10, 1), (10, -1), (0, 0)) == 10


def test_gromov_product_vanishes_on_segments(disc, rng):
    for x, y in zip(disc.sample(rng, 50), disc.sample(rng, 50)):
        seg = disc.geodesic_between(x, y)
        p = seg.point(rng.random() * seg.length)
        assert gromov_product(disc, x, y, p) < 1e-9


def test_tree_delta_is_zero():
    edges = [(0, 1, 1.5), (1, 2, 0.5), (1, 3, 2.0), (3, 4, 1.0), (3, 5, 0.25)]
    est = delta_estimate(FiniteGraph(edges), exhaustive=True)
    assert est.value == 0 and est.exhaustive


def test_cycle_delta_is_positive():
    est = delta_estimate(FiniteGraph([(i, (i + 1) % 8, 1) for i in range(8)]), exhaustive=True)
    assert est.value == 2


def test_single_point_delta():
    est = delta_estimate(FiniteGraph([], vertices=["o"]), exhaustive=True)
    assert est.value == 0


def test_disc_delta_bounded_and_stable(disc):
    vals = [delta_estimate(disc, n=20000, seed=s).value for s in (0, 1)]
    for v in vals:
        assert 0 < v <= 2
    assert abs(vals[0] - vals[1]) <= 0.1 * max(vals)


def test_delta_monotone_in_nested_samples(disc, rng):
    pts = disc.sample(rng, 4000)
    quads = [tuple(pts[4 * i: 4 * i + 4]) for i in range(1000)]
    small = delta_estimate(disc, quadruples=quads[:200]).value
    large = delta_estimate(disc, quadruples=quads).value
    assert large >= small


def test_goes_to_infinity(disc, ladder):
    assert goes_to_infinity(disc, [1 - 2.0 ** -n for n in range(1, 21)], 0)
    assert not goes_to_infinity(disc, [0.5] * 10, 0)
    assert goes_to_infinity(ladder, [(n, (-1) ** n) for n in range(1, 21)], (0, 0))


def test_rails_are_asymptotic(ladder):
    res = asymptotic(ladder.ray_to((0, 1), 1), ladder.ray_to((0, -1), -1))
    assert res.status is Status.TRUE
    # the distance between rail points is 3 off the rungs and 2 on them
    assert res.sup == pytest.approx(3)


def test_same_ray_is_asymptotic(disc):
    ray = disc.ray_to(0, 1)
    res = asymptotic(ray, ray)
    assert res.status is Status.TRUE and res.sup == pytest.approx(0, abs=1e-9)


def test_opposite_rays_are_not_asymptotic(disc):
    res = asymptotic(disc.ray_to(0, 1), disc.ray_to(0, -1))
    assert res.status is not Status.TRUE


def test_gap_examples(disc, ladder):
    ray = disc.ray_to(0, 1)
    assert strong_asymptoticity_gap(ray, ray, 3.0) < 1e-9
    rails = ladder.ray_to((0, 1), 1), ladder.ray_to((0, -1), -1)
    assert strong_asymptoticity_gap(*rails, 7.25) == pytest.approx(2.25, abs=1e-6)
    assert strong_asymptoticity_gap(ray, disc.ray_to(0.5j, 1), 10.0) < 0.01


def test_rails_are_not_strongly_asymptotic(ladder):
    res = extract_shifts(ladder.ray_to((0, 1), 1), ladder.ray_to((0, -1), -1))
    assert isinstance(res, NotStronglyAsymptotic)
    assert res.gap_floor == pytest.approx(2.0, abs=0.01)


def test_disc_rays_have_shifts(disc):
    res = extract_shifts(disc.ray_to(0, 1), disc.ray_to(0.5j, 1))
    assert isinstance(res, ShiftPair) and res.terminal_gap < 1e-3


@pytest.mark.parametrize("c", [0.0, 0.5, 2.0, 10.0])
def test_shift_recovery(disc, c):
    ray = disc.ray_to(0.2 - 0.1j, np.exp(0.7j))
    res = extract_shifts(ray, ShiftedCurve(ray, c))
    # sigma(t) = gamma(t + c) lines up with T - S = c
    assert res.T - res.S == pytest.approx(c, abs=1e-6)
    assert res.terminal_gap < 1e-6


def test_exact_reparametrization_at_high_precision():
    disc = PoincareDisc(dps=30)
    ray = disc.ray_to(0.2 - 0.1j, np.exp(0.7j))
    res = extract_shifts(ray, ShiftedCurve(ray, 2.0))
    assert res.T - res.S == pytest.approx(2.0, abs=1e-8)
    assert res.terminal_gap < 1e-9


def test_shifts_imply_equal_busemann(disc, rng):
    r1, r2 = disc.ray_to(0.3, 1j), disc.ray_to(-0.4 - 0.2j, 1j)
    assert isinstance(extract_shifts(r1, r2), ShiftPair)
    grid = disc.sample(rng, 20, radius=0.9)
    b1 = busemann_many(r1, grid, 0)
    b2 = busemann_many(r2, grid, 0)
    assert np.max(np.abs(b1 - b2)) < 1e-5


def test_extract_shifts_reports_slow_decay(disc):
    # horizon far too short to see the gap settle
    with pytest.raises(InconclusiveError):
        extract_shifts(disc.ray_to(0, 1), disc.ray_to(0.9j, 1), horizon=2.0, step=0.25)


def test_quasigeodesic_examples(disc, ladder):
    ray = disc.ray_to(0, 1)
    assert is_quasigeodesic(disc, [ray.point(t) for t in range(12)], 1, 0).passed
    orbit = [(n, 1) if n else (0, 0) for n in range(30)]
    d01 = ladder.distance(orbit[0], orbit[1])
    assert is_quasigeodesic(ladder, orbit, max(1, d01), 0).passed
    cert = is_quasigeodesic(disc, [0.5] * 5, 1, 0)
    assert not cert.passed and cert.worst_violation == pytest.approx(4)


def test_interpolation(disc):
    ray = disc.ray_to(0, 1)
    assert interpolate_discrete(disc, [0.25]).point(3.7) == 0.25
    curve = interpolate_discrete(disc, [ray.point(t) for t in range(12)], A=1, B=0)
    assert curve.certificate.passed
    pts = [ray.point(2.0 * n) for n in range(7)]
    assert is_quasigeodesic(disc, pts, 2, 0).passed
    assert interpolate_discrete(disc, pts, A=2, B=0).certificate.passed
