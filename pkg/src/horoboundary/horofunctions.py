"""Horofunctions along sequences, Busemann functions along rays, horoballs.

Horofunctions are held extensionally: values on an evaluation grid plus an
evaluator that re-runs the limit at any other point.  Stopping is by
Cauchy increments; no monotonicity of the pre-limit family is assumed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._numeric import minimize_on_interval
from .errors import ConvergenceError, InconclusiveError, PreconditionError
from .hyperbolicity import goes_to_infinity

IN, OUT, UNDECIDED = "in", "out", "undecided"


def _stabilize(rows, tol, confirm):
    """First index ``k`` where ``confirm`` consecutive increments of ``rows`` stay below ``tol``.

    ``rows[k]`` is the vector of pre-limit values at term ``k``.  Returns
    ``(k_end, residual)`` with ``rows[k_end]`` the accepted estimate.
    """
    run = 0
    for k in range(1, len(rows)):
        inc = float(np.max(np.abs(rows[k] - rows[k - 1]))) if len(rows[k]) else 0.0
        run = run + 1 if inc < tol else 0
        if run >= confirm:
            tail = [np.max(np.abs(rows[j] - rows[j - 1])) if len(rows[j]) else 0.0
                    for j in range(k - confirm + 1, k + 1)]
            return k, float(max(tail))
    return None, None


@dataclass(frozen=True, eq=False)
class HorofunctionHandle:
    """Limit of ``x -> d(x, w_n) - d(w_n, p)`` (sequence) or ``d(x, g(t)) - d(g(t), p)`` (ray)."""

    space: object
    basepoint: object
    source: object
    kind: str
    grid: list
    values: np.ndarray
    residual: float
    horizon: float
    tol: float = 1e-9
    confirm: int = 3
    start: int = field(default=0, repr=False)

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        if self.kind == "ray":
            return busemann(self.source, x, self.basepoint, tol=self.tol, t_max=self.horizon)
        seq = self.source
        p = self.basepoint
        rows = [np.array([float(self.space.distance(x, w) - self.space.distance(w, p))])
                for w in seq[self.start:]]
        k, _ = _stabilize(rows, self.tol, self.confirm)
        if k is None:
            raise InconclusiveError("horofunction tail did not stabilize at this point", point=x)
        return float(rows[k][0])

    def evaluate_many(self, xs):
        if self.kind == "ray":
            return busemann_many(self.source, xs, self.basepoint, tol=self.tol, t_max=self.horizon)
        return np.array([self.evaluate(x) for x in xs])


def horofunction_along(space, sequence, p, grid, tol=1e-9, confirm=3, threshold=3.0, window=5):
    """Horofunction of a Gromov-divergent sequence, evaluated on ``grid``."""
    seq = list(sequence)
    grid = list(grid)
    if not grid:
        raise ValueError("evaluation grid is empty")
    if not goes_to_infinity(space, seq, p, window=min(window, len(seq)), threshold=threshold):
        raise PreconditionError("sequence does not go to infinity on its tail")
    rows = []
    for w in seq:
        dwp = space.distance(w, p)
        rows.append(np.array([float(space.distance(x, w) - dwp) for x in grid]))
    k, residual = _stabilize(rows, tol, confirm)
    if k is None:
        incs = [float(np.max(np.abs(rows[j] - rows[j - 1]))) for j in range(1, len(rows))]
        raise InconclusiveError("horofunction tail is not Cauchy", last_increments=incs[-confirm:])
    return HorofunctionHandle(space, p, seq, "sequence", grid, rows[k], residual,
                              float(len(seq)), tol, confirm, max(k - confirm, 0))


def _doubling(f, t0, tol, t_max):
    t = float(t0)
    prev = f(t)
    while True:
        t *= 2
        if t > t_max:
            raise ConvergenceError(f"Busemann limit did not stabilize before t = {t_max}")
        cur = f(t)
        if np.max(np.abs(cur - prev)) < tol:
            return cur, float(np.max(np.abs(cur - prev))), t
        prev = cur


def busemann(ray, x, y=None, tol=1e-9, t0=1.0, t_max=512.0):
    """``lim_t d(x, ray(t)) - d(y, ray(t))`` by doubling ``t``; ``y`` defaults to the ray origin."""
    if y is None:
        return _doubling(lambda t: ray.dist_to(x, t) - t, t0, tol, t_max)[0]
    return _doubling(lambda t: ray.dist_to(x, t) - ray.dist_to(y, t), t0, tol, t_max)[0]


def busemann_many(ray, xs, y=None, tol=1e-9, t0=1.0, t_max=512.0):
    """Vectorized :func:`busemann` over the points ``xs``."""
    xs = list(xs)
    if y is None:
        def f(t):
            return ray.dists_to(xs, t) - t
    else:
        def f(t):
            return ray.dists_to(xs, t) - ray.dist_to(y, t)
    return np.asarray(_doubling(f, t0, tol, t_max)[0], dtype=float)


def busemann_handle(ray, p=None, grid=(), tol=1e-9, t_max=512.0):
    """Busemann function of ``ray`` normalized at ``p`` (default: the ray origin)."""
    space = ray.space
    p = ray.origin if p is None else p
    grid = list(grid)
    vals = busemann_many(ray, grid, p, tol=tol, t_max=t_max) if grid else np.zeros(0)
    return HorofunctionHandle(space, p, ray, "ray", grid, vals, tol, t_max, tol)


@dataclass(frozen=True)
class HoroballSpec:
    """``E_p(a, R) = {h < log R}``."""

    h: HorofunctionHandle
    R: float

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("horoball radius must be positive")


def horoball_membership(spec, x, value=None):
    """``"in"``, ``"out"`` or ``"undecided"`` when ``|h(x) - log R|`` is within the residual."""
    h = spec.h.evaluate(x) if value is None else value
    margin = h - math.log(spec.R)
    if abs(margin) <= spec.h.residual:
        return UNDECIDED
    return IN if margin < 0 else OUT


def _approach_families(space, xi, p, count, rng, horizon):
    """Deterministic shapes of sequences converging to ``xi``: radial, jittered, re-based."""
    ts = np.linspace(horizon / 2, horizon, 16)
    fams = []
    if space.kind == "ladder":
        for eps in (1, -1):
            fams.append(("rail%+d" % eps, [(float(t), eps) for t in ts]))
        for j in range(count):
            b = float(rng.uniform(-1, 1))
            fams.append(("rung", [(int(t), b) for t in ts]))
            fams.append(("jittered", [(int(t), float(rng.uniform(-1, 1))) for t in ts]))
        return fams
    ray = space.ray_to(p, xi)
    fams.append(("radial", [ray.point(t) for t in ts]))
    for _ in range(count):
        fams.append(("jittered", [space.offsets(ray.point(t), 1.0, 1, rng)[0] for t in ts]))
        q = space.offsets(p, 2.0, 1, rng)[0]
        other = space.ray_to(q, xi)
        fams.append(("rebased", [other.point(t) for t in ts]))
    return fams


def big_small_gap(space, xi, p, R, x, count=4, seed=0, horizon=24.0, tail=0.25):
    """Liminf/limsup of ``d(x, w) - d(w, p)`` over pooled tails of several sequences ``w -> xi``."""
    rng = np.random.default_rng(seed)
    pooled = []
    for _, seq in _approach_families(space, xi, p, count, rng, horizon):
        k = max(1, int(round(len(seq) * tail)))
        for w in seq[-k:]:
            pooled.append(float(space.distance(x, w) - space.distance(w, p)))
    lo, hi = min(pooled), max(pooled)
    logR = math.log(R)
    return {"big_member": lo < logR, "small_member": hi < logR,
            "liminf": lo, "limsup": hi, "spread": hi - lo}


def ladder_horofunction(beta):
    """Ladder horofunction with base ``(0, 0)`` for ``w_n = (n, beta)``: ``-a + |beta| - |b + beta|``.

    The same family is often written ``-a + |beta| - |b - beta|``; that form
    labels the limit of ``(n, beta)`` by ``-beta``.
    """
    def h(x):
        a, b = x
        return -a + abs(beta) - abs(b + beta)
    return h


def ladder_grid(a_values=range(9), b_values=(-1, -0.5, 0, 0.5, 1)):
    return [(a, b) for a in a_values for b in b_values]


@dataclass
class Cluster:
    members: list
    representative: np.ndarray
    residual: float
    beta: float = None


@dataclass
class Atlas:
    grid: list
    clusters: list
    threshold: float

    def to_json(self, space):
        out = []
        for c in self.clusters:
            d = {"members": [str(m) for m in c.members],
                 "values": [float(v) for v in c.representative],
                 "residual": float(c.residual)}
            if c.beta is not None:
                d["beta"] = float(c.beta)
            out.append(d)
        return {"grid": [space.point_to_json(g) for g in self.grid],
                "threshold": self.threshold, "clusters": out}


def _fit_beta(grid, values, p=(0, 0)):
    """Target level ``beta`` of a ladder horofunction given on ``grid`` and normalized at ``p``."""
    def err(beta):
        h = ladder_horofunction(beta)
        hp = h(p)
        return max(abs(v - h(x) + hp) for x, v in zip(grid, values))
    beta, e = minimize_on_interval(err, -1.0, 1.0, grid_step=1 / 64)
    return beta, e


def boundary_atlas(space, p, grid, directions=None, count=8, seed=0, terms=None, tol=1e-9):
    """Horofunctions of divergent sequences in sampled directions, clustered on ``grid``.

    On the ladder a direction is a target level ``beta``: ``w_n = (n, beta)``.
    Elsewhere it is a boundary direction and the limit runs along the ray
    from ``p``.  Clusters merge functions within ``max(10 * residual, 1e-9)``
    in grid sup-distance.
    """
    grid = list(grid)
    rng = np.random.default_rng(seed)
    handles = []
    if space.kind == "ladder":
        if directions is None:
            directions = list(rng.uniform(-1, 1, count))
        a_max = max(g[0] for g in grid)
        n_terms = terms or int(a_max) + 12
        for beta in directions:
            seq = [(n, beta) for n in range(1, n_terms)]
            handles.append((beta, horofunction_along(space, seq, p, grid, tol=tol)))
    else:
        if directions is None:
            directions = space.sample_directions(rng, count)
        for xi in directions:
            handles.append((xi, busemann_handle(space.ray_to(p, xi), p, grid, tol=tol)))
    threshold = max(10 * max(h.residual for _, h in handles), 1e-9)
    clusters = []
    for label, h in handles:
        for c in clusters:
            if np.max(np.abs(c.representative - h.values)) <= threshold:
                c.members.append(label)
                c.residual = max(c.residual, h.residual)
                break
        else:
            clusters.append(Cluster([label], h.values, h.residual))
    if space.kind == "ladder":
        for c in clusters:
            c.beta = _fit_beta(grid, c.representative, p)[0]
    return Atlas(grid, clusters, threshold)


@dataclass(frozen=True)
class WeakJuliaResult:
    passed: bool
    worst_margin: float
    offender: object
    A: float


def weakJ_check(space, f, sequence, p, grid, slack=1e-6, tol=1e-9, confirm=3):
    """Check ``h_b(f(x)) <= h_a(x) + A`` on ``grid`` with ``a``, ``b`` the limits of ``w_n``, ``f(w_n)``."""
    seq = list(sequence)
    img = [f(w) for w in seq]
    ha = horofunction_along(space, seq, p, grid, tol=tol, confirm=confirm)
    hb = horofunction_along(space, img, p, [f(x) for x in grid], tol=tol, confirm=confirm)
    diffs = [np.array([float(space.distance(p, w) - space.distance(p, v))]) for w, v in zip(seq, img)]
    k, _ = _stabilize(diffs, tol, confirm)
    if k is None:
        raise InconclusiveError("d(p, w_n) - d(p, f(w_n)) did not stabilize")
    A = float(diffs[k][0])
    margins = ha.values + A - hb.values
    i = int(np.argmin(margins))
    worst = float(margins[i])
    return WeakJuliaResult(worst >= -slack, worst, grid[i], A)
