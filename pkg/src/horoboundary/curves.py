"""Unit-speed geodesic segments and rays, plus a few derived curves.

Every curve exposes ``point(t)`` and ``dist_to(x, t)``.  The closed-form
Möbius and chord rays override ``dist_to`` with a frame-based evaluation
that stays accurate when ``curve.point(t)`` itself has run into the
floating-point boundary of its model; Busemann limits rely on this.
"""
from __future__ import annotations

import bisect
import math

import numpy as np

from .errors import DomainError


class Curve:
    """A map from ``[0, length]`` (``[0, inf)`` for rays) into a space."""

    space = None
    length = math.inf

    @property
    def origin(self):
        return self.point(0.0)

    @property
    def is_ray(self):
        return math.isinf(self.length)

    def _check(self, t):
        if t < 0 or t > self.length + 1e-12:
            raise DomainError(f"parameter {t} outside [0, {self.length}]")
        return min(t, self.length)

    def point(self, t):
        raise NotImplementedError

    def points(self, ts):
        return [self.point(t) for t in ts]

    def dist_to(self, x, t):
        return float(self.space.distance(x, self.point(t)))

    def dists_to(self, xs, t):
        return self.space.distances(xs, self.point(t))

    def tabulate(self, horizon, h=0.05):
        """Sample the curve on ``[0, horizon]`` with step ``h``."""
        n = int(math.floor(horizon / h + 1e-9))
        return SampledCurve(self.space, [self.point(k * h) for k in range(n + 1)], h)


class DiscCurve(Curve):
    """``t -> phi_p(tanh(t/2) u)`` in the Poincaré disc, ``phi_p`` the involution swapping p and 0."""

    def __init__(self, space, p, u, length=math.inf):
        self.space = space
        self.p = p
        self.u = u
        self.length = length

    def point(self, t):
        t = self._check(t)
        m = self.space._m
        r = m.tanh(m.mpf(t) / 2)
        return self.space.phi(self.p, r * self.u)

    def dist_to(self, x, t):
        m = self.space._m
        t = m.mpf(self._check(t))
        y = self.space.phi(self.p, self.space.point(x))
        r = m.tanh(t / 2)
        num = abs(y - r * self.u)
        den = abs(1 - r * (y * self.u.conjugate()))
        rho = num / den
        if rho < 0.5:
            return float(2 * m.atanh(rho))
        log_omr = _log_sech2_half(t, m) + m.log(1 - abs(y) ** 2) - 2 * m.log(den)
        return float(2 * m.log(1 + rho) - log_omr)

    def dists_to(self, xs, t):
        if self.space.dps:
            return np.array([self.dist_to(x, t) for x in xs])
        t = self._check(t)
        y = self.space.phi(self.p, np.asarray(xs, dtype=complex))
        return _radial_dists(y, self.u, t)


def _log_sech2_half(t, m=math):
    """``log(1 - tanh(t/2)^2)`` without underflow."""
    return m.log(4) - t - 2 * m.log1p(m.exp(-t))


def _radial_dists(y, u, t):
    """Distances from disc points ``y`` to ``tanh(t/2) u``, stable for large ``t``."""
    r = math.tanh(t / 2)
    num = np.abs(y - r * u)
    den = np.abs(1 - r * y * np.conj(u))
    rho = num / den
    with np.errstate(divide="ignore", invalid="ignore"):
        log_omr = _log_sech2_half(t) + np.log(1 - np.abs(y) ** 2) - 2 * np.log(den)
        far = 2 * np.log1p(rho) - log_omr
        near = 2 * np.arctanh(np.minimum(rho, 0.5))
    return np.where(rho < 0.5, near, far)


class BallCurve(Curve):
    """Ball analogue of :class:`DiscCurve` (complex unit ball, any dimension)."""

    def __init__(self, space, p, u, length=math.inf):
        self.space = space
        self.p = np.asarray(p, dtype=complex)
        self.u = np.asarray(u, dtype=complex)
        self.length = length

    def point(self, t):
        t = self._check(t)
        return self.space.phi(self.p, math.tanh(t / 2) * self.u)

    def dist_to(self, x, t):
        return float(self.dists_to(np.asarray(x, dtype=complex)[None, :], t)[0])

    def dists_to(self, xs, t):
        t = self._check(t)
        y = self.space.phi(self.p, np.atleast_2d(np.asarray(xs, dtype=complex)))
        r = math.tanh(t / 2)
        lsech = _log_sech2_half(t)
        delta = y - r * self.u
        par = np.abs(delta @ np.conj(self.u)) ** 2
        perp = np.maximum(np.sum(np.abs(delta) ** 2, axis=-1) - par, 0.0)
        num = par + math.exp(lsech) * perp
        den = np.abs(1 - r * (y @ np.conj(self.u)))
        rho = np.sqrt(num) / den
        with np.errstate(divide="ignore", invalid="ignore"):
            log_omr = lsech + np.log(1 - np.sum(np.abs(y) ** 2, axis=-1)) - 2 * np.log(den)
            far = 2 * np.log1p(rho) - log_omr
            near = 2 * np.arctanh(np.minimum(rho, 0.5))
        return np.where(rho < 0.5, near, far)


class HalfPlaneCurve(Curve):
    """Right half-plane curve obtained from a disc radius by Cayley transfer.

    The affine map ``w -> Re(x) w + i Im(x)`` sends 1 to the origin ``x`` of
    the curve and the Cayley map sends 1 to the disc centre, so the curve is
    ``t -> A(C^{-1}(tanh(t/2) u))``.  ``1 - tanh(t/2)`` is evaluated as
    ``2 / (e^t + 1)`` so rays towards infinity stay exact.
    """

    def __init__(self, space, x, u, length=math.inf):
        self.space = space
        self.x = complex(x)
        self.u = complex(u)
        self.length = length

    def point(self, t):
        t = self._check(t)
        r = math.tanh(t / 2)
        one_minus_r = 2.0 / (math.exp(t) + 1.0) if t < 700 else 0.0
        den = (1 - self.u) + one_minus_r * self.u
        if den == 0:
            raise DomainError(f"curve parameter {t} beyond floating range")
        return self.x.real * (1 + r * self.u) / den + 1j * self.x.imag

    def dists_to(self, xs, t):
        t = self._check(t)
        w = (np.asarray(xs, dtype=complex) - 1j * self.x.imag) / self.x.real
        return _radial_dists((w - 1) / (w + 1), self.u, t)

    def dist_to(self, x, t):
        return float(self.dists_to(np.array([complex(x)]), t)[0])


class KleinCurve(Curve):
    """Straight chord in a Klein ellipsoid, parametrized by Hilbert arclength.

    Internally ``t -> cosh(t) P + sinh(t) V`` on the hyperboloid over the
    unit ball; ``dist_to`` uses Lorentz products, which keeps far points exact.
    """

    def __init__(self, space, P, V, length=math.inf):
        self.space = space
        self.P = np.asarray(P, dtype=float)
        self.V = np.asarray(V, dtype=float)
        self.length = length

    def point(self, t):
        t = self._check(t)
        X = math.cosh(t) * self.P + math.sinh(t) * self.V
        return self.space.from_ball(X[1:] / X[0])

    def dists_to(self, xs, t):
        t = self._check(t)
        X = self.space.hyperboloid(np.atleast_2d(np.asarray(xs, dtype=float)))
        a = -_lorentz(X, self.P)
        b = _lorentz(X, self.V)
        # cosh(t) a - sinh(t) b, arranged to avoid overflow cancellation
        y = 0.5 * math.exp(t) * (a - b) + 0.5 * math.exp(-t) * (a + b)
        y = np.maximum(y, 1.0)
        far = np.log(y + np.sqrt((y - 1.0) * (y + 1.0)))
        out = far.copy()
        small = far < 1.0
        if np.any(small):
            pt = self.point(t)
            idx = np.nonzero(small)[0]
            out[idx] = self.space.distances(np.atleast_2d(xs)[idx], pt)
        return out

    def dist_to(self, x, t):
        return float(self.dists_to(np.asarray(x, dtype=float)[None, :], t)[0])


def _lorentz(X, Y):
    return -X[..., 0] * Y[..., 0] + np.sum(X[..., 1:] * Y[..., 1:], axis=-1)


class PolylineCurve(Curve):
    """Piecewise-linear ladder path through waypoints, optionally continued along a rail."""

    def __init__(self, space, waypoints, tail_rail=None):
        self.space = space
        pts = [tuple(waypoints[0])]
        for w in waypoints[1:]:
            if tuple(w) != pts[-1]:
                pts.append(tuple(w))
        self.waypoints = pts
        self.cum = [0]
        for a, b in zip(pts, pts[1:]):
            self.cum.append(self.cum[-1] + abs(b[0] - a[0]) + abs(b[1] - a[1]))
        self.tail_rail = tail_rail
        if tail_rail is not None and pts[-1][1] != tail_rail:
            raise DomainError("ray tail must start on its rail")
        self.length = math.inf if tail_rail is not None else self.cum[-1]

    def point(self, t):
        t = self._check(t)
        if t >= self.cum[-1]:
            a, b = self.waypoints[-1]
            if self.tail_rail is None:
                return (a, b)
            return (a + (t - self.cum[-1]), b)
        i = bisect.bisect_right(self.cum, t) - 1
        (a0, b0), (a1, b1) = self.waypoints[i], self.waypoints[i + 1]
        seg = self.cum[i + 1] - self.cum[i]
        lam = (t - self.cum[i]) / seg
        if a0 == a1:
            return (a0, b0 + (b1 - b0) * lam)
        return (a0 + (a1 - a0) * lam, b0)


class GraphPath(Curve):
    """Vertex path in a finite graph; defined at the vertex arclengths only."""

    def __init__(self, space, vertices):
        self.space = space
        self.vertices = list(vertices)
        self.times = [0.0]
        for u, v in zip(self.vertices, self.vertices[1:]):
            self.times.append(self.times[-1] + space.distance(u, v))
        self.length = self.times[-1]

    def point(self, t):
        t = self._check(t)
        i = bisect.bisect_right(self.times, t + 1e-12) - 1
        return self.vertices[i]


class ShiftedCurve(Curve):
    """``t -> base(t + shift)``."""

    def __init__(self, base, shift):
        if shift < 0:
            raise ValueError("shift must be non-negative")
        self.base = base
        self.shift = shift
        self.space = base.space
        self.length = base.length - shift

    def point(self, t):
        return self.base.point(self._check(t) + self.shift)

    def dist_to(self, x, t):
        return self.base.dist_to(x, self._check(t) + self.shift)

    def dists_to(self, xs, t):
        return self.base.dists_to(xs, self._check(t) + self.shift)


class StepCurve(Curve):
    """``t -> points[floor(t)]`` on ``[0, len(points))``; a single point gives a constant curve."""

    def __init__(self, space, points, certificate=None):
        if not points:
            raise ValueError("need at least one point")
        self.space = space
        self.table = list(points)
        self.length = math.inf if len(self.table) == 1 else float(len(self.table)) - 1e-9
        self.certificate = certificate

    def point(self, t):
        t = self._check(t)
        return self.table[min(int(math.floor(t)), len(self.table) - 1)]


class SampledCurve(Curve):
    """Discrete point table with step ``h``; ``point(t)`` returns the nearest sample."""

    def __init__(self, space, table, h=0.05):
        if h <= 0:
            raise ValueError("step must be positive")
        self.space = space
        self.table = list(table)
        self.h = h
        self.length = h * (len(self.table) - 1)

    def point(self, t):
        t = self._check(t)
        return self.table[min(int(round(t / self.h)), len(self.table) - 1)]
