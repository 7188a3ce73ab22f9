"""Gromov products, four-point delta, asymptotic rays and shift extraction.

Limits are replaced by finite-horizon surrogates; whenever a surrogate
cannot decide, the result says so instead of reporting ``False``.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import curves
from ._numeric import minimize_on_interval
from .errors import InconclusiveError


def gromov_product(space, x, y, p):
    """``(x|y)_p = (d(x, p) + d(y, p) - d(x, y)) / 2``."""
    g = (space.distance(x, p) + space.distance(y, p) - space.distance(x, y)) / 2
    # rounding can push a true zero slightly negative; exact inputs stay exact
    return max(g, 0.0) if isinstance(g, (float, np.floating)) else g


@dataclass(frozen=True)
class DeltaEstimate:
    """Lower bound on the four-point hyperbolicity constant."""

    value: float
    quadruple: tuple
    count: int
    exhaustive: bool


def _four_point(dxy, dzp, dxz, dyp, dxp, dyz):
    # (largest - second largest) / 2 of the three pair sums is the defect
    # min((x|z)_p, (y|z)_p) - (x|y)_p, maximized over the role of p
    s = np.stack(np.broadcast_arrays(dxy + dzp, dxz + dyp, dxp + dyz))
    s.sort(axis=0)
    return (s[2] - s[1]) / 2


def delta_estimate(space, n=1000, seed=0, quadruples=None, exhaustive=False, radius=None):
    """Empirical four-point delta.

    With ``exhaustive=True`` on a finite graph every quadruple of vertices is
    checked and the value is the exact delta.  Otherwise ``n`` random
    quadruples (or the given ``quadruples``) are scored and the value is a
    lower bound.
    """
    if exhaustive:
        return _delta_exhaustive(space)
    if quadruples is None:
        if n < 1:
            raise ValueError("need at least one quadruple")
        rng = np.random.default_rng(seed)
        kw = {} if radius is None else {"radius": radius}
        pts = space.sample(rng, 4 * n, **kw)
        quadruples = [tuple(pts[4 * i: 4 * i + 4]) for i in range(n)]
    quadruples = list(quadruples)
    if not quadruples:
        raise ValueError("empty sample")
    cols = list(zip(*quadruples))
    x, y, z, p = cols

    def pd(u, v):
        return space.pair_distances(list(u), list(v))

    vals = _four_point(pd(x, y), pd(z, p), pd(x, z), pd(y, p), pd(x, p), pd(y, z))
    i = int(np.argmax(vals))
    return DeltaEstimate(max(float(vals[i]), 0.0), quadruples[i], len(quadruples), False)


def _delta_exhaustive(space):
    D = np.asarray(space.matrix())
    if np.isinf(D).any():
        raise ValueError("exhaustive delta needs a connected graph")
    n = len(D)
    best, arg = 0.0, (0, 0, 0, 0)
    for x in range(n):
        # all (y, z, p) at once for this x
        dxy = D[x][:, None, None]
        dxz = D[x][None, :, None]
        dxp = D[x][None, None, :]
        dzp = D[None, :, :]
        dyp = D[:, None, :]
        dyz = D[:, :, None]
        vals = _four_point(dxy, dzp, dxz, dyp, dxp, dyz)
        k = int(np.argmax(vals))
        if vals.flat[k] > best:
            y, z, p = np.unravel_index(k, vals.shape)
            best, arg = float(vals.flat[k]), (x, int(y), int(z), int(p))
    names = space.vertices
    return DeltaEstimate(best, tuple(names[i] for i in arg), n**4, True)


def goes_to_infinity(space, sequence, p, window=5, threshold=3.0):
    """Finite surrogate for Gromov divergence: pairwise products on the tail all exceed ``threshold``."""
    seq = list(sequence)
    if window < 2 or len(seq) < window:
        raise ValueError("need window >= 2 and at least window points")
    tail = seq[-window:]
    worst = min(gromov_product(space, u, v, p) for u, v in itertools.combinations(tail, 2))
    return bool(worst > threshold)


class Status(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class AsymptoticResult:
    status: Status
    sup: float
    argsup: float
    horizon: float

    def __bool__(self):
        return self.status is Status.TRUE


def asymptotic(ray1, ray2, horizon=30.0, bound_window=5.0, step=0.05, tol=1e-9):
    """Are ``t -> d(ray1(t), ray2(t))`` bounded?  Decided on ``[0, horizon]``.

    True when the maximum over the last window does not exceed the maximum
    seen before it; false when the function grew by at least half the window
    length across that window; inconclusive otherwise.
    """
    if not horizon > bound_window > 0:
        raise ValueError("need horizon > bound_window > 0")
    n = int(round(horizon / step))
    ts = np.linspace(0.0, horizon, n + 1)
    vals = np.array([ray2.dist_to(ray1.point(t), t) for t in ts])
    cut = ts <= horizon - bound_window + 1e-12
    early, late = vals[cut].max(), vals[~cut].max()
    i = int(np.argmax(vals))
    sup, argsup = float(vals[i]), float(ts[i])
    start = vals[cut][-1]
    if late <= early + tol:
        status = Status.TRUE
    elif vals[-1] - start >= bound_window / 2:
        status = Status.FALSE
    else:
        status = Status.INCONCLUSIVE
    return AsymptoticResult(status, sup, argsup, horizon)


def _inner_min(ray2, x, hi):
    space = ray2.space
    grid = None if space.convex else 0.05
    hi = min(hi, ray2.length)
    return minimize_on_interval(lambda s: ray2.dist_to(x, s), 0.0, hi, grid_step=grid)


def strong_asymptoticity_gap(ray1, ray2, t, return_argmin=False):
    """``inf_{s >= 0} d(ray1(t), ray2(s))``; the infimum is attained in ``[0, 2 d(ray1(t), ray2(0))]``."""
    x = ray1.point(t)
    d0 = ray2.dist_to(x, 0.0)
    s, gap = _inner_min(ray2, x, 2 * d0 + 1e-9)
    gap = max(gap, 0.0)
    return (gap, s) if return_argmin else gap


@dataclass(frozen=True)
class ShiftPair:
    """Shifts with ``d(ray1(t + T), ray2(t + S)) -> 0``."""

    T: float
    S: float
    terminal_gap: float


@dataclass(frozen=True)
class NotStronglyAsymptotic:
    gap_floor: float
    horizon: float


def extract_shifts(ray1, ray2, horizon=20.0, step=0.5, final_tol=1e-3, tail=0.25):
    """Recover the time shifts of two strongly asymptotic rays.

    Tracks ``f(t) = s_t - t`` with ``s_t`` the minimizer of the gap, and
    requires the Cauchy bound ``|f(t) - f(t_n)| <= 2 eps_n`` after the first
    time ``t_n`` the gap stays below ``eps_n``, for ``eps_n = 1, 1/2, ...``
    down to ``final_tol``.  The sign of the limit of ``f`` decides which ray
    is shifted.
    """
    ts = np.arange(step, horizon + 1e-9, step)
    gaps, fs = [], []
    for t in ts:
        g, s = strong_asymptoticity_gap(ray1, ray2, float(t), return_argmin=True)
        gaps.append(g)
        fs.append(s - t)
    gaps, fs = np.array(gaps), np.array(fs)
    if len(ts) < 4:
        raise ValueError("horizon must cover at least four steps")
    k0 = min(int(len(ts) * (1 - tail)), len(ts) - 4)
    tail_gaps = gaps[k0:]
    if tail_gaps.min() > final_tol:
        half = len(tail_gaps) // 2
        # a floor is a tail whose minimum has stopped dropping
        if tail_gaps[half:].min() < 0.99 * tail_gaps[:half].min():
            raise InconclusiveError(
                "gap still shrinking at the horizon", gap=float(tail_gaps[-1]), horizon=horizon
            )
        return NotStronglyAsymptotic(float(tail_gaps.min()), horizon)
    eps = 1.0
    while True:
        eps = max(eps, final_tol)
        above = np.nonzero(gaps > eps)[0]
        n0 = 0 if len(above) == 0 else above[-1] + 1
        if n0 >= len(ts):
            raise InconclusiveError("gap not yet below tolerance", eps=eps, horizon=horizon)
        drift = np.abs(fs[n0:] - fs[n0]).max()
        if drift > 2 * eps + 1e-9:
            raise InconclusiveError("minimizer offsets are not Cauchy", eps=eps, drift=float(drift))
        if eps <= final_tol:
            break
        eps /= 2
    c = float(fs[-1])
    T, S = (0.0, c) if c >= 0 else (-c, 0.0)
    # measured inside the horizon; float points beyond it lose digits
    th = horizon - max(T, S)
    terminal = ray2.dist_to(ray1.point(th + T), th + S)
    if terminal > final_tol:
        raise InconclusiveError("terminal gap above tolerance", terminal_gap=terminal)
    return ShiftPair(T, S, float(terminal))


@dataclass(frozen=True)
class QuasiGeodesicCertificate:
    """Worst violation is positive by the amount a bound failed; ``passed`` iff it is <= tol."""

    A: float
    B: float
    verified_pairs: int
    worst_violation: float
    worst_pair: tuple
    passed: bool


def is_quasigeodesic(space, points, A, B, times=None, tol=1e-9):
    """Check ``|i-j|/A - B <= d(x_i, x_j) <= A|i-j| + B`` on all index pairs."""
    if A < 1 or B < 0:
        raise ValueError("need A >= 1 and B >= 0")
    pts = list(points)
    if len(pts) < 2:
        raise ValueError("need at least two points")
    ts = np.arange(len(pts), dtype=float) if times is None else np.asarray(times, dtype=float)
    worst, arg, count = -math.inf, None, 0
    for i in range(len(pts) - 1):
        d = space.distances(pts[i + 1:], pts[i])
        dt = np.abs(ts[i + 1:] - ts[i])
        viol = np.maximum(dt / A - B - d, d - A * dt - B)
        j = int(np.argmax(viol))
        count += len(d)
        if viol[j] > worst:
            worst, arg = float(viol[j]), (i, i + 1 + j)
    return QuasiGeodesicCertificate(float(A), float(B), count, worst, arg, worst <= tol)


def interpolate_discrete(space, points, A=None, B=0.0, resolution=4):
    """Step curve ``t -> x_floor(t)``; with ``A`` given, certify it as an ``(A, A + B)`` quasi-geodesic."""
    pts = list(points)
    cert = None
    if A is not None:
        if len(pts) == 1:
            cert = QuasiGeodesicCertificate(float(A), float(A + B), 0, -math.inf, None, True)
        else:
            ts = np.arange(len(pts) * resolution) / resolution
            samples = [pts[int(math.floor(t))] for t in ts]
            cert = is_quasigeodesic(space, samples, A, A + B, times=ts)
    return curves.StepCurve(space, pts, certificate=cert)
