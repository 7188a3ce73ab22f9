"""Dynamics of non-expanding self-maps: orbits, steps, rates, dilations, Julia's lemma.

Every limit is read off a finite tail.  Orbits of hyperbolic disc maps
reach the floating-point boundary after a few dozen steps; pass a
``PoincareDisc(dps=...)`` space for long horizons.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import maps as maps_mod
from ._numeric import minimize_on_interval
from .errors import (DomainError, InconclusiveError, MapValidationError, PreconditionError,
                     SamplingError, SolverError)
from .horofunctions import busemann, busemann_many, horofunction_along
from .hyperbolicity import gromov_product, is_quasigeodesic
from .spaces import PoincareDisc

STEPS = (1, 2, 4, 8)
BOUNDED, DIVERGING, INCONCLUSIVE = "bounded", "diverging", "inconclusive"


def _distances_from(space, pts, x):
    if getattr(space, "dps", 0):
        return np.array([float(space.distance(p, x)) for p in pts])
    return np.asarray(space.distances(pts, x), dtype=float)


def _pairs(space, xs, ys):
    if getattr(space, "dps", 0):
        return np.array([float(space.distance(x, y)) for x, y in zip(xs, ys)])
    return np.asarray(space.pair_distances(xs, ys), dtype=float)


@dataclass(frozen=True, eq=False)
class OrbitRecord:
    """Orbit ``x_0..x_N`` with step tables ``steps[m][k] = d(x_k, x_{k+m})``."""

    points: list
    direction: str
    steps: dict
    classification: str
    radius: float = field(default=0.0, repr=False)
    space: object = field(default=None, repr=False)

    @property
    def n(self):
        return len(self.points) - 1


def _run(step, x, n, what):
    pts = [x]
    try:
        for _ in range(n):
            pts.append(step(pts[-1]))
    except DomainError as exc:
        raise InconclusiveError(
            f"{what} left the numerical domain after {len(pts) - 1} steps; "
            "use a higher-precision space", steps=len(pts) - 1
        ) from exc
    return pts


def step_tables(space, pts, steps=STEPS):
    return {m: _pairs(space, pts[:-m], pts[m:]) for m in steps if m < len(pts)}


def classify_orbit(space, pts, head=32, returns=3):
    """Bounded / diverging / inconclusive surrogate for the orbit dichotomy.

    ``R0`` is the diameter of the first ``head`` iterates.  Diverging: every
    iterate of the last quarter is farther than ``R0`` from ``x_0`` and the
    distances at the quartile marks strictly increase.  Bounded: at least
    ``returns`` iterates of the last half lie in the closed ``R0``-ball.
    """
    n = len(pts) - 1
    first = pts[:head]
    R0 = max((float(space.distance(u, v)) for u, v in itertools.combinations(first, 2)), default=0.0)
    d0 = _distances_from(space, pts, pts[0])
    if n >= 8:
        marks = d0[[n // 4, n // 2, 3 * n // 4, n]]
        if d0[3 * n // 4:].min() > R0 and np.all(np.diff(marks) > 0):
            return DIVERGING, R0
    if np.count_nonzero(d0[n // 2:] <= R0 + 1e-12) >= returns:
        return BOUNDED, R0
    return INCONCLUSIVE, R0


def iterate(f, x, n, steps=STEPS):
    """Forward orbit of length ``n`` with step tables and classification."""
    if n < 0:
        raise ValueError("n must be non-negative")
    space = f.space
    pts = _run(f, space.point(x), n, "orbit")
    cls, R0 = classify_orbit(space, pts)
    return OrbitRecord(pts, "forward", step_tables(space, pts, steps), cls, R0, space)


def _check_monotone(seq, sign, tol, what):
    # sign = +1: non-increasing expected; -1: non-decreasing
    d = sign * np.diff(seq)
    bad = d > tol * (1 + np.abs(seq[:-1]))
    if np.any(bad):
        k = int(np.argmax(bad))
        raise MapValidationError(f"{what} not monotone at index {k}: {seq[k]} -> {seq[k + 1]}")


def forward_step(f, x, m, n=64, tol=1e-9):
    """``s_m(x)``: tail value of the non-increasing sequence ``d(f^k x, f^{k+m} x)``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    space = f.space
    pts = _run(f, space.point(x), n + m, "orbit")
    seq = _pairs(space, pts[:-m], pts[m:])
    _check_monotone(seq, 1, tol, f"forward {m}-step")
    return float(seq[-1])


@dataclass(frozen=True)
class RateEstimate:
    """Both estimates bound ``c(f)`` from above; ``value`` is the smaller."""

    primary: float
    secondary: float
    discrepancy: float
    consistent: bool
    horizon: int

    @property
    def value(self):
        return min(self.primary, self.secondary)


def divergence_rate(f, x, horizon=64, m_max=16):
    """``d(x, f^n x) / n`` at ``n = horizon`` and ``min_{m <= m_max} s_m / m`` from the orbit tail."""
    if horizon < 64:
        raise PreconditionError("divergence rate needs horizon >= 64")
    space = f.space
    pts = _run(f, space.point(x), horizon, "orbit")
    primary = float(space.distance(pts[0], pts[-1])) / horizon
    secondary = min(float(space.distance(pts[-1 - m], pts[-1])) / m for m in range(1, m_max + 1))
    disc = abs(primary - secondary)
    ok = disc <= 0.05 * (1 + abs(secondary))
    if not ok:
        warnings.warn(f"divergence rate estimates disagree by {disc:.3g}; convergence is slow",
                      RuntimeWarning, stacklevel=2)
    return RateEstimate(primary, secondary, disc, ok, horizon)


@dataclass(frozen=True)
class DisplacementEstimate:
    """Upper bound on ``tau(f) = inf_x d(x, f x)`` over the sampled points."""

    value: float
    argmin: object
    count: int


def minimal_displacement(f, points=None, n=1000, seed=0):
    space = f.space
    if points is None:
        if n < 1:
            raise ValueError("need at least one sample")
        points = space.sample(np.random.default_rng(seed), n)
    points = list(points)
    disp = _pairs(space, points, [f(p) for p in points])
    i = int(np.argmin(disp))
    return DisplacementEstimate(float(disp[i]), points[i], len(points))


@dataclass(frozen=True)
class DenjoyWolffEstimate:
    direction: object
    agreement: float
    min_gromov: float
    directions: list


def denjoy_wolff(f, starts, horizon=64, agree_tol=1e-3, gromov_threshold=None):
    """Common boundary limit of the forward orbits from ``starts``."""
    space = f.space
    tails = []
    for s in starts:
        rec = iterate(f, s, horizon, steps=())
        if rec.classification == BOUNDED:
            raise PreconditionError(f"orbit from {s!r} is bounded")
        if rec.classification != DIVERGING:
            raise InconclusiveError(f"orbit from {s!r} is not classified as diverging")
        tails.append(rec.points[-1])
    dirs = [space.boundary_direction(x) for x in tails]
    agreement = max((space.direction_distance(u, v) for u, v in itertools.combinations(dirs, 2)),
                    default=0.0)
    p = space.point(starts[0])
    if gromov_threshold is None:
        gromov_threshold = 0.25 * min(float(space.distance(p, x)) for x in tails)
    gp = min((float(gromov_product(space, u, v, p)) for u, v in itertools.combinations(tails, 2)),
             default=math.inf)
    if agreement > agree_tol:
        raise InconclusiveError("terminal directions disagree", agreement=agreement)
    if gp <= gromov_threshold:
        raise InconclusiveError("orbit tails are not Gromov-close", min_gromov=gp)
    return DenjoyWolffEstimate(dirs[0], float(agreement), gp, dirs)


def _precise(f, dps=40):
    """``f`` on an extended-precision disc when it lives on a float disc."""
    space = f.space
    if isinstance(space, PoincareDisc) and not space.dps and f.rule in maps_mod.RULES:
        return maps_mod.load_map(PoincareDisc(dps=dps), f.descriptor())
    return f


def _approach(space, eta, p, ts, jitter, radius, rng):
    """Points ``(family, t, z)`` tending to ``eta``: rays from ``p`` plus jittered companions."""
    out = []
    if space.kind == "ladder":
        if eta != "end":
            rays = [("rail%+d" % eta, space.ray_to(p, eta))]
        else:
            rays = [("rail+1", space.ray_to(p, 1)), ("rail-1", space.ray_to(p, -1))]
        for name, ray in rays:
            for t in ts:
                out.append((name, t, ray.point(t)))
        for t in ts:
            k = int(math.floor(t))
            for _ in range(jitter):
                out.append(("rung", t, (k, float(rng.uniform(-1, 1)))))
        return out
    ray = space.ray_to(p, eta)
    for t in ts:
        z = ray.point(t)
        out.append(("ray", t, z))
        if jitter:
            for w in space.offsets(z, radius, jitter, rng):
                out.append(("jitter", t, w))
    return out


@dataclass(frozen=True)
class DilationEstimate:
    """``log lambda_{eta,p}`` as the minimum over the pooled tail of ``d(z, p) - d(f z, p)``."""

    eta: object
    p: object
    value: float
    approach: str
    window: tuple
    spread: float
    family: str


def dilation(f, eta, p, horizon=24.0, n_points=48, jitter=8, jitter_radius=1.0, tail=0.25,
             seed=0, stab_tol=1e-6, precise=True):
    """Dilation of ``f`` at the boundary direction ``eta`` seen from ``p``."""
    g = _precise(f) if precise else f
    space = g.space
    p = space.point(p)
    rng = np.random.default_rng(seed)
    t0 = (1 - tail) * horizon
    ts = np.linspace(t0, horizon, max(int(n_points * tail), 4))
    dp = float(space.distance(p, g(p)))
    pts = _approach(space, eta, p, ts, jitter, jitter_radius, rng)
    vals = np.array([float(space.distance(z, p) - space.distance(g(z), p)) for _, _, z in pts])
    tt = np.array([t for _, t, _ in pts])
    i = int(np.argmin(vals))
    mid = 0.5 * (t0 + horizon)
    early, late = vals[tt <= mid].min(), vals[tt > mid].min()
    if abs(early - late) > stab_tol * (1 + abs(late)):
        raise InconclusiveError("dilation tail is not stable", early=float(early), late=float(late))
    value = float(vals[i])
    if value < -dp - 1e-9 * (1 + dp):
        raise MapValidationError("dilation below -d(p, f(p)); the map is not non-expanding")
    desc = f"rays to {eta!r} from p with {jitter} jittered companions of radius {jitter_radius}"
    return DilationEstimate(eta, p, value, desc, (float(t0), float(horizon)),
                            float(vals.max() - vals.min()), pts[i][0])


@dataclass(frozen=True)
class GeodesicRegion:
    """``A(ray, R) = {x : inf_t d(x, ray(t)) < R}``."""

    ray: object
    R: float

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("region radius must be positive")


@dataclass(frozen=True)
class RegionMembership:
    member: bool
    t: float
    distance: float


def region_membership(region, x):
    """Distance from ``x`` to the ray (attained in ``[0, 2 d(x, ray(0))]``) compared with ``R``."""
    ray = region.ray
    d0 = ray.dist_to(x, 0.0)
    grid = None if ray.space.convex else 0.05
    t, d = minimize_on_interval(lambda s: ray.dist_to(x, s), 0.0, 2 * d0 + 1e-9, grid_step=grid)
    d = max(d, 0.0)
    return RegionMembership(d < region.R, t, d)


@dataclass(frozen=True)
class DivergenceCheck:
    passed: bool
    values: list
    crossings: dict


def region_busemann_divergence(region, xs, p, bounds=(-5.0, -10.0, -20.0)):
    """``B_ray(x_n, p)`` must fall below each bound and stay there."""
    xs = list(xs)
    for x in xs:
        if not region_membership(region, x).member:
            raise PreconditionError(f"{x!r} is not in the region")
    vals = [busemann(region.ray, x, p) for x in xs]
    crossings = {}
    for b in bounds:
        above = [k for k, v in enumerate(vals) if v >= b]
        last = above[-1] if above else -1
        if last == len(vals) - 1:
            raise InconclusiveError(f"Busemann values have not passed {b} within the horizon",
                                    final=vals[-1])
        crossings[b] = last + 1
    ordered = all(crossings[a] <= crossings[b] for a, b in zip(bounds, bounds[1:]))
    return DivergenceCheck(ordered, vals, crossings)


def _region_images(f, eta, p, count, horizon, seed):
    space = f.space
    rng = np.random.default_rng(seed)
    ts = np.linspace(0.75 * horizon, horizon, count)
    pts = _approach(space, eta, p, ts, 1, 0.9, rng)
    return [(t, z, f(z)) for _, t, z in pts]


def geodesic_limit(f, eta, p, count=16, horizon=20.0, seed=0):
    """Direction of ``f(z_n)`` for ``z_n`` approaching ``eta`` inside a geodesic region."""
    space = f.space
    ims = _region_images(f, eta, p, count, horizon, seed)
    dirs = [space.boundary_direction(w) for _, _, w in ims]
    spread = max((space.direction_distance(dirs[-1], d) for d in dirs), default=0.0)
    return dirs[-1], spread, ims


@dataclass(frozen=True)
class BRFPResult:
    is_brfp: bool
    log_dilation: float
    limit: object
    limit_error: float


def brfp_check(f, eta, p, horizon=24.0, count=16, dir_tol=1e-3, seed=0):
    """Finite dilation at ``eta`` and geodesic limit of ``f`` at ``eta`` equal to ``eta``."""
    space = f.space
    xi, spread, ims = geodesic_limit(f, eta, p, count, horizon, seed)
    err = space.direction_distance(xi, eta)
    # images must also Gromov-follow the ray to eta
    ray = space.ray_to(p, eta)
    gp = min(float(gromov_product(space, w, ray.point(t), p)) for t, _, w in ims)
    follows = err <= dir_tol and spread <= dir_tol and gp > 0.25 * horizon
    try:
        lam = dilation(f, eta, p, horizon=horizon, seed=seed).value
    except InconclusiveError:
        if not follows:
            return BRFPResult(False, None, xi, float(err))
        raise
    return BRFPResult(bool(follows), lam, xi, float(err))


@dataclass(frozen=True)
class JuliaResult:
    passed: bool
    violations: int
    samples: int
    worst_margin: float
    offender: object
    log_lambda: float
    xi: object


def _minimizing_sequence(space, fam, p, n_terms):
    if fam.startswith("rail"):
        eps = int(fam[4:])
        ray = space.ray_to(p, eps)
        return [ray.point(float(t)) for t in range(1, n_terms)]
    return [(n, 0.0) for n in range(1, n_terms)]


def julia_check(f, eta, p, R, n_samples=10_000, slack=1e-6, seed=0, box=None, batch=20_000,
                max_batches=50, dilation_kw=None):
    """Sample ``x`` with ``h_eta(x) < log R`` and check ``h_xi(f x) < log(lambda R) + slack``.

    With approaching geodesics both horofunctions are Busemann functions of
    rays from ``p``.  Otherwise (the ladder) they are the horofunctions of
    the sequence realizing the dilation and of its image.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    # sampling needs no extended precision; dilation builds its own precise twin
    f = maps_mod.float_twin(f)
    space = f.space
    p = space.point(complex(p)) if space.kind == "poincare_disc" else space.point(p)
    dil = dilation(f, eta, p, **(dilation_kw or {}))
    log_lam = dil.value
    logR = math.log(R)
    rng = np.random.default_rng(seed)
    if box is None:
        box = {"radius": 10} if space.kind == "ladder" else {"radius": 0.999}
    if space.approaching_geodesics:
        xi, _, _ = geodesic_limit(f, eta, p, seed=seed)
        if space.direction_distance(xi, eta) < 1e-3:
            xi = eta
        ray_in, ray_out = space.ray_to(p, eta), space.ray_to(p, xi)

        def h_in(xs):
            return busemann_many(ray_in, xs, p, tol=1e-10)

        def h_out(xs):
            return busemann_many(ray_out, xs, p, tol=1e-10)
    else:
        xi = eta
        n_terms = int(box.get("radius", 10)) + 16
        seq = _minimizing_sequence(space, dil.family, p, n_terms)
        img = [f(w) for w in seq]

        def h_in(xs):
            return horofunction_along(space, seq, p, xs).values

        def h_out(xs):
            return horofunction_along(space, img, p, xs).values

    accepted = []
    for _ in range(max_batches):
        xs = space.sample(rng, batch, **box)
        keep = np.nonzero(h_in(xs) < logR)[0]
        accepted.extend(xs[i] for i in keep)
        if len(accepted) >= n_samples:
            break
    if len(accepted) < n_samples:
        raise SamplingError(f"only {len(accepted)} of {n_samples} samples fell in the horoball")
    accepted = accepted[:n_samples]
    fx = [f(x) for x in accepted]
    excess = h_out(fx) - (log_lam + logR)
    bad = int(np.count_nonzero(excess > slack))
    i = int(np.argmax(excess))
    return JuliaResult(bad == 0, bad, len(accepted), float(-excess[i]), accepted[i], log_lam, xi)


def _numeric_preimage(f, y, starts, tol, rng):
    space = f.space
    if space.kind not in ("poincare_disc", "right_half_plane"):
        raise SolverError(f"no numeric preimage solver for {space.kind}")

    def unpack(v):
        return complex(v[0], v[1])

    def obj(v):
        z = unpack(v)
        try:
            space.point(z)
        except DomainError:
            return 1e6
        return float(space.distance(f(z), y))

    best = None
    for z0 in [y] + list(space.offsets(y, 2.0, starts - 1, rng)):
        res = minimize(obj, [complex(z0).real, complex(z0).imag], method="Nelder-Mead",
                       options={"xatol": 1e-13, "fatol": 1e-14, "maxiter": 4000})
        if best is None or res.fun < best.fun:
            best = res
    if best.fun > tol:
        raise SolverError(f"preimage residual {best.fun:.3g} above {tol}")
    return unpack(best.x)


def backward_orbit(f, x0, n, starts=8, residual_tol=1e-8, seed=0):
    """Backward orbit ``f(w_{k+1}) = w_k`` with ``sigma_m`` tables (non-decreasing in ``k``)."""
    space = f.space
    rng = np.random.default_rng(seed)
    if f.inverse is not None:
        step = f.inverse
    else:
        def step(y):
            return _numeric_preimage(f, y, starts, residual_tol, rng)
    pts = _run(step, space.point(x0), n, "backward orbit")
    tables = step_tables(space, pts)
    for m, seq in tables.items():
        _check_monotone(seq, -1, 1e-9, f"backward {m}-step")
    cls, R0 = classify_orbit(space, pts)
    return OrbitRecord(pts, "backward", tables, cls, R0, space)


def backward_step_bounded(orbit, tol=1e-6, tail=4):
    """``sigma_1`` surrogate: the last ``tail`` entries of the 1-step table agree within ``tol``."""
    s = orbit.steps[1][-tail:]
    return bool(np.ptp(s) <= tol * (1 + abs(s[-1])))


def orbit_quasigeodesic_check(orbit, c_estimate, tol=1e-9):
    """Quasi-geodesic constants ``(A, 0)`` for a forward or backward orbit with ``c(f) > 0``."""
    if not c_estimate > 0:
        raise PreconditionError("the orbit check needs c(f) > 0")
    pts = orbit.points
    if orbit.direction == "forward":
        A = max(1 / c_estimate, float(orbit.steps[1][0]) if 1 in orbit.steps else 0.0)
    else:
        A = max(1 / c_estimate, float(np.max(orbit.steps[1])))
    # the definition needs A >= 1
    A = max(A, 1.0)
    return is_quasigeodesic(orbit.space, pts, A, 0.0, tol=tol)


@dataclass(frozen=True)
class KingResult:
    passed: bool
    log_lambda: float
    c: float
    zeta: object


def king_inequality_check(f, p, starts=None, horizon=64, margin=0.02, dilation_kw=None):
    """``log lambda_zeta <= -c(f) + margin`` with ``zeta`` the Denjoy-Wolff estimate."""
    dw = denjoy_wolff(f, starts or [p], horizon)
    zeta = dw.direction
    lam = dilation(f, zeta, p, **(dilation_kw or {})).value
    c = divergence_rate(f, p, horizon).value
    return KingResult(bool(lam <= -c + margin), lam, c, zeta)
