import math

import numpy as np
import pytest

from horoboundary.dynamics import (BOUNDED, DIVERGING, GeodesicRegion, backward_orbit,
                                   backward_step_bounded, brfp_check, denjoy_wolff, dilation,
                                   divergence_rate, forward_step, iterate, julia_check,
                                   king_inequality_check, minimal_displacement,
                                   orbit_quasigeodesic_check, region_busemann_divergence,
                                   region_membership)
from horoboundary.errors import MapValidationError, PreconditionError
from horoboundary.maps import (composite, graph_table, halfplane_affine, identity, ladder_f1,
                               ladder_f2, load_map, mobius_disc, rotation_disc,
                               validate_nonexpanding)
from horoboundary.spaces import FiniteGraph, PoincareDisc, RightHalfPlane

LOG2 = math.log(2)


@pytest.fixture
def hp():
    return RightHalfPlane()


@pytest.fixture
def precise_disc():
    return PoincareDisc(dps=60)


def test_expanding_map_rejected(ladder):
    with pytest.raises(MapValidationError):
        validate_nonexpanding(ladder, lambda x: (2 * x[0], x[1]))


def test_expanding_graph_table_rejected():
    g = FiniteGraph([(0, 1, 1), (1, 2, 1)])
    with pytest.raises(MapValidationError):
        graph_table(g, {0: 0, 1: 2, 2: 1})


def test_unknown_rule(disc):
    with pytest.raises(ValueError, match="unknown map rule"):
        load_map(disc, {"rule": "shear"})


def test_mobius_inverse_and_fixed_points(disc):
    f = mobius_disc(disc, 1j, -1j, 3.0)
    for z in (0, 0.4 - 0.2j, -0.7j):
        assert abs(f.inverse(f(z)) - z) < 1e-12
    assert abs(f(0.999999j) - 0.999999j) < 1e-5


def test_composite_of_rotations(disc):
    f = composite(rotation_disc(disc, 0.5), rotation_disc(disc, 0.25))
    assert abs(f(0.5) - 0.5 * np.exp(0.75j)) < 1e-15
    assert f.isometry


def test_orbit_classification(disc, ladder, hp):
    assert iterate(rotation_disc(disc, 1.0), 0.5, 1000).classification == BOUNDED
    rec = iterate(ladder_f1(ladder), (0, 0), 100)
    assert rec.classification == DIVERGING and rec.steps[1][-1] == 1
    rec = iterate(halfplane_affine(hp, 1, 1), 1, 1000)
    assert rec.classification == DIVERGING
    # sublinear growth
    assert hp.distance(rec.points[0], rec.points[-1]) < 0.05 * 1000


def test_forward_steps(disc, ladder, precise_disc):
    assert forward_step(identity(disc), 0.3, 1) == 0
    assert forward_step(ladder_f1(ladder), (0, 0), 2) == 2
    f = mobius_disc(precise_disc, 1, -1, 2.0)
    assert forward_step(f, 0, 1) == pytest.approx(LOG2, abs=1e-12)


def test_step_tables_monotone(ladder):
    rec = iterate(ladder_f2(ladder), (0, 0.5), 64)
    for seq in rec.steps.values():
        assert np.all(np.diff(seq) <= 1e-12)


def test_divergence_rates(ladder, hp):
    assert divergence_rate(ladder_f1(ladder), (0, 1)).value == pytest.approx(1, abs=1e-6)
    assert divergence_rate(halfplane_affine(hp, 1, 1), 1, horizon=10_000).value <= 1e-2
    assert divergence_rate(halfplane_affine(hp, 2, 0), 1).value == pytest.approx(LOG2, abs=1e-3)


def test_rate_needs_a_long_horizon(ladder):
    with pytest.raises(PreconditionError):
        divergence_rate(ladder_f1(ladder), (0, 0), horizon=10)


def test_minimal_displacement(disc, ladder, hp):
    assert minimal_displacement(identity(disc)).value == 0
    grid = [(a / 20, e) for a in range(200) for e in (1, -1)]
    grid += [(a, b / 20) for a in range(10) for b in range(-20, 21)]
    tau = minimal_displacement(ladder_f2(ladder), grid).value
    assert 2.95 <= tau <= 3.0
    axis = [float(x) for x in np.linspace(0.1, 10, 50)]
    assert minimal_displacement(halfplane_affine(hp, 2, 0), axis).value == pytest.approx(LOG2, abs=1e-6)


def test_denjoy_wolff(disc, ladder, precise_disc):
    f = mobius_disc(precise_disc, 1, -1, 2.0)
    dw = denjoy_wolff(f, [0, 0.5j, -0.9])
    assert abs(complex(dw.direction) - 1) < 1e-3 and dw.agreement < 1e-3
    assert denjoy_wolff(ladder_f1(ladder), [(0, 0), (3, -1)]).direction == "end"
    with pytest.raises(PreconditionError):
        denjoy_wolff(rotation_disc(disc, 1.0), [0.5])


def test_ladder_dilations(ladder):
    f = ladder_f1(ladder)
    assert dilation(f, "end", (0, 1)).value == pytest.approx(-1, abs=1e-6)
    assert dilation(f, "end", (0, -1)).value == pytest.approx(-3, abs=1e-6)


def test_identity_dilation(disc):
    assert dilation(identity(disc), np.exp(2j), 0.3).value == pytest.approx(0, abs=1e-9)


def test_dilation_lower_bound(disc):
    f = mobius_disc(disc, 1, -1, 5.0)
    p = 0.2 + 0.3j
    d = dilation(f, 1, p)
    assert d.value >= -disc.distance(p, f(p)) - 1e-9


def test_region_membership(disc, ladder):
    ray = disc.ray_to(0, 1)
    m = region_membership(GeodesicRegion(ray, 0.1), ray.point(5.0))
    assert m.member and m.t == pytest.approx(5.0, abs=1e-6)
    m = region_membership(GeodesicRegion(ladder.ray_to((0, 1), 1), 1.5), (4, -1))
    assert not m.member and m.distance == pytest.approx(2)
    assert region_membership(GeodesicRegion(ray, 0.5), 0.9 * np.exp(0.01j)).member


def test_region_busemann_divergence(disc, ladder, rng):
    ray = disc.ray_to(0, 1)
    region = GeodesicRegion(ray, 1.0)
    on_ray = [ray.point(float(n)) for n in range(1, 26)]
    res = region_busemann_divergence(region, on_ray, 0)
    assert res.passed
    assert res.values == pytest.approx([-n for n in range(1, 26)], abs=1e-6)
    jittered = [disc.offsets(ray.point(float(n)), 0.9, 1, rng)[0] for n in range(1, 26)]
    assert region_busemann_divergence(region, jittered, 0).passed
    rail = ladder.ray_to((0, 1), 1)
    xs = [(n, 1 - 1 / n) for n in range(1, 30)]
    assert region_busemann_divergence(GeodesicRegion(rail, 1.1), xs, (0, 1)).passed


def test_brfp(disc, ladder):
    res = brfp_check(ladder_f1(ladder), "end", (0, 1))
    assert res.is_brfp and res.log_dilation <= -1 + 1e-9
    f = mobius_disc(disc, 1, -1, 3.0)
    res = brfp_check(f, 1, 0)
    assert res.is_brfp and res.log_dilation == pytest.approx(-math.log(3), abs=1e-3)
    assert not brfp_check(f, 1j, 0).is_brfp


def test_julia_examples(disc, ladder):
    res = julia_check(identity(disc), np.exp(0.4j), 0, 2.0, n_samples=2000)
    assert res.passed and res.log_lambda == pytest.approx(0, abs=1e-9)
    f = mobius_disc(disc, 1, -1, 2.0)
    for R in (0.5, 1, 2):
        res = julia_check(f, 1, 0, R, n_samples=2000)
        assert res.passed and res.violations == 0
    res = julia_check(ladder_f1(ladder), "end", (0, 1), 1.0, n_samples=2000)
    assert res.passed and res.log_lambda == pytest.approx(-1, abs=1e-6)


def test_backward_orbits(disc, ladder):
    f = mobius_disc(disc, 1, -1, 2.0)
    orb = backward_orbit(f, 0, 20)
    assert abs(orb.points[-1] + 1) < 1e-3
    orb = backward_orbit(identity(disc), 0.3, 10)
    assert all(np.all(v == 0) for v in orb.steps.values())
    orb = backward_orbit(ladder_f2(ladder), (10, 1), 9)
    assert orb.steps[1][-1] == 3 and backward_step_bounded(orb)


def test_numeric_preimages(hp):
    f = halfplane_affine(hp, 2, 0)
    g = type(f)(hp, "opaque", {}, f.fn)
    orb = backward_orbit(g, 8, 3)
    assert abs(orb.points[-1] - 1) < 1e-6


def test_orbit_quasigeodesics(ladder, hp):
    rec = iterate(ladder_f1(ladder), (0, 1), 40)
    cert = orbit_quasigeodesic_check(rec, 1.0)
    assert cert.passed and cert.A == 1
    rec = iterate(halfplane_affine(hp, 2, 0), 1, 40)
    assert orbit_quasigeodesic_check(rec, LOG2).passed
    with pytest.raises(PreconditionError):
        orbit_quasigeodesic_check(iterate(halfplane_affine(hp, 1, 1), 1, 40), 0.0)


def test_backward_orbit_quasigeodesic(ladder):
    orb = backward_orbit(ladder_f2(ladder), (12, 1), 12)
    assert orbit_quasigeodesic_check(orb, 1.0).passed


def test_king_inequality(ladder, precise_disc):
    f = ladder_f1(ladder)
    res = king_inequality_check(f, (0, 1))
    assert res.passed and res.log_lambda == pytest.approx(-1) and res.c == pytest.approx(1)
    res = king_inequality_check(f, (0, -1), starts=[(0, 1)])
    assert res.passed and res.log_lambda == pytest.approx(-3)
    g = mobius_disc(precise_disc, 1, -1, 4.0)
    res = king_inequality_check(g, 0)
    assert abs(res.log_lambda + res.c) < 1e-3
