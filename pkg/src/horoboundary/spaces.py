"""Model metric spaces with exact distance rules.

Normalization: the disc, ball and half-plane carry the curvature -1 metric
with ``d(0, r) = log((1 + r) / (1 - r))``; the Klein ellipsoid carries the
Hilbert metric ``1/2 log`` of the cross ratio, which is the same metric in
the Klein model.  All spaces are immutable after construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import ClassVar

import numpy as np

from . import curves
from ._numeric import FLOAT
from .errors import CapabilityError, DomainError, UnreachableError

_EDGE_TOL = 1e-15


class Space:
    """Common interface; subclasses fill in the closed forms."""

    kind: ClassVar[str] = ""
    has_rays: ClassVar[bool] = True
    # CAT(-1) spaces: distance to a geodesic is convex along it
    convex: ClassVar[bool] = True
    approaching_geodesics: ClassVar[bool] = True

    def point(self, x):
        raise NotImplementedError

    def distance(self, x, y):
        raise NotImplementedError

    def distances(self, xs, y):
        """Distances from each of ``xs`` to ``y`` as a float array."""
        return np.array([float(self.distance(x, y)) for x in xs], dtype=float)

    def pair_distances(self, xs, ys):
        return np.array([float(self.distance(x, y)) for x, y in zip(xs, ys)], dtype=float)

    def geodesic_between(self, x, y):
        raise NotImplementedError

    def ray_to(self, p, xi):
        raise CapabilityError(f"{self.kind} has no geodesic rays")

    def sample(self, rng, n, **kw):
        raise NotImplementedError

    def offsets(self, z, r, count, rng):
        """``count`` random points within distance ``r`` of ``z``."""
        raise NotImplementedError

    def boundary_direction(self, x):
        raise CapabilityError(f"{self.kind} has no boundary directions")

    def direction_distance(self, xi, eta):
        raise CapabilityError(f"{self.kind} has no boundary directions")

    def sample_directions(self, rng, n):
        raise CapabilityError(f"{self.kind} has no boundary directions")

    def descriptor(self):
        return {"kind": self.kind}

    def point_to_json(self, x):
        return x

    def point_from_json(self, v):
        return self.point(v)

    def direction_to_json(self, xi):
        return xi

    def direction_from_json(self, v):
        return v


def _near_far(rho, omr, m=None):
    """``log((1+rho)/(1-rho))`` given ``rho`` and ``omr = 1 - rho^2``."""
    if m is None:
        with np.errstate(divide="ignore", invalid="ignore"):
            near = 2 * np.arctanh(np.minimum(rho, 0.5))
            far = 2 * np.log1p(rho) - np.log(omr)
        return np.where(rho < 0.5, near, far)
    if rho < 0.5:
        return 2 * m.atanh(rho)
    return 2 * m.log(1 + rho) - m.log(omr)


def _complex_pair(v):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    return complex(v)


@dataclass(frozen=True, eq=False)
class PoincareDisc(Space):
    """Unit disc; ``dps > 0`` switches to mpmath arithmetic at that precision."""

    dps: int = 0
    _m: object = field(init=False, repr=False, default=None)

    kind: ClassVar[str] = "poincare_disc"

    def __post_init__(self):
        if self.dps:
            import mpmath

            ctx = mpmath.MPContext()
            ctx.dps = int(self.dps)
            object.__setattr__(self, "_m", ctx)
        else:
            object.__setattr__(self, "_m", FLOAT)

    def point(self, z):
        z = self._m.mpc(z) if self.dps else complex(z)
        if not abs(z) < 1:
            raise DomainError(f"{z} is not inside the unit disc")
        return z

    @staticmethod
    def phi(p, z):
        """Involutive automorphism exchanging ``p`` and 0."""
        return (p - z) / (1 - p.conjugate() * z)

    def distance(self, z, w):
        z, w = self.point(z), self.point(w)
        m = self._m
        den = abs(1 - z.conjugate() * w)
        rho = abs(z - w) / den
        omr = (1 - abs(z) ** 2) * (1 - abs(w) ** 2) / den**2
        return _near_far(rho, omr, m)

    def distances(self, zs, w):
        if self.dps:
            return np.array([float(self.distance(z, w)) for z in zs])
        zs = np.asarray(zs, dtype=complex)
        w = complex(w)
        den = np.abs(1 - np.conj(zs) * w)
        rho = np.abs(zs - w) / den
        omr = (1 - np.abs(zs) ** 2) * (1 - abs(w) ** 2) / den**2
        return _near_far(rho, omr)

    def pair_distances(self, zs, ws):
        if self.dps:
            return super().pair_distances(zs, ws)
        zs = np.asarray(zs, dtype=complex)
        ws = np.asarray(ws, dtype=complex)
        den = np.abs(1 - np.conj(zs) * ws)
        rho = np.abs(zs - ws) / den
        omr = (1 - np.abs(zs) ** 2) * (1 - np.abs(ws) ** 2) / den**2
        return _near_far(rho, omr)

    def geodesic_between(self, x, y):
        x, y = self.point(x), self.point(y)
        v = self.phi(x, y)
        u = v / abs(v) if abs(v) > 0 else self._m.mpc(1)
        return curves.DiscCurve(self, x, u, float(self.distance(x, y)))

    def _unit(self, xi):
        xi = self._m.mpc(xi) if self.dps else complex(xi)
        if abs(abs(xi) - 1) > 1e-9:
            raise DomainError(f"{xi} is not on the unit circle")
        return xi / abs(xi)

    def ray_to(self, p, xi):
        p = self.point(p)
        v = self.phi(p, self._unit(xi))
        return curves.DiscCurve(self, p, v / abs(v))

    def boundary_direction(self, z):
        z = complex(z)
        return z / abs(z) if z else 1 + 0j

    def direction_distance(self, xi, eta):
        return abs(complex(xi) - complex(eta))

    def sample(self, rng, n, radius=0.99):
        r = radius * np.sqrt(rng.random(n))
        z = r * np.exp(2j * np.pi * rng.random(n))
        return list(z) if not self.dps else [self.point(v) for v in z]

    def sample_directions(self, rng, n):
        return list(np.exp(2j * np.pi * rng.random(n)))

    def offsets(self, z, r, count, rng):
        z = self.point(z)
        s = np.tanh(r * rng.random(count) / 2)
        w = s * np.exp(2j * np.pi * rng.random(count))
        if self.dps:
            return [(self._m.mpc(v) + z) / (1 + z.conjugate() * self._m.mpc(v)) for v in w]
        return list((w + z) / (1 + np.conj(z) * w))

    def descriptor(self):
        d = {"kind": self.kind}
        if self.dps:
            d["dps"] = int(self.dps)
        return d

    def point_to_json(self, z):
        z = complex(z)
        return [z.real, z.imag]

    def point_from_json(self, v):
        return self.point(_complex_pair(v))

    def direction_to_json(self, xi):
        return self.point_to_json(xi)

    def direction_from_json(self, v):
        return self._unit(_complex_pair(v))


@dataclass(frozen=True, eq=False)
class RightHalfPlane(Space):
    """``{Re w > 0}``, isometric to the disc through ``C(w) = (w - 1) / (w + 1)``.

    Boundary directions are ``1j * y`` for real ``y`` or ``math.inf``.
    """

    kind: ClassVar[str] = "right_half_plane"

    def point(self, w):
        w = complex(w)
        if not w.real > 0 or not math.isfinite(abs(w)):
            raise DomainError(f"{w} is not in the right half-plane")
        return w

    @staticmethod
    def cayley(w):
        if w == math.inf:
            return 1 + 0j
        return (w - 1) / (w + 1)

    @staticmethod
    def cayley_inv(v):
        return (1 + v) / (1 - v)

    def distance(self, z, w):
        z, w = self.point(z), self.point(w)
        den = abs(w + z.conjugate())
        rho = abs(w - z) / den
        omr = 4 * z.real * w.real / den**2
        return float(_near_far(rho, omr, FLOAT))

    def distances(self, zs, w):
        zs = np.asarray(zs, dtype=complex)
        w = complex(w)
        den = np.abs(w + np.conj(zs))
        rho = np.abs(w - zs) / den
        omr = 4 * zs.real * w.real / den**2
        return _near_far(rho, omr)

    def pair_distances(self, zs, ws):
        zs = np.asarray(zs, dtype=complex)
        ws = np.asarray(ws, dtype=complex)
        den = np.abs(ws + np.conj(zs))
        rho = np.abs(ws - zs) / den
        omr = 4 * zs.real * ws.real / den**2
        return _near_far(rho, omr)

    def _pull(self, x, w):
        # inverse of w -> Re(x) w + i Im(x)
        return (w - 1j * x.imag) / x.real

    def geodesic_between(self, x, y):
        x, y = self.point(x), self.point(y)
        v = self.cayley(self._pull(x, y))
        u = v / abs(v) if abs(v) > 0 else 1 + 0j
        return curves.HalfPlaneCurve(self, x, u, self.distance(x, y))

    def _direction(self, xi):
        if isinstance(xi, str) and xi.lower() in ("inf", "infinity"):
            return math.inf
        if isinstance(xi, float) and math.isinf(xi):
            return math.inf
        xi = complex(xi)
        if abs(xi.real) > 1e-12:
            raise DomainError(f"{xi} is not on the imaginary axis")
        return complex(0.0, xi.imag)

    def ray_to(self, p, xi):
        p = self.point(p)
        xi = self._direction(xi)
        if xi == math.inf:
            return curves.HalfPlaneCurve(self, p, 1 + 0j)
        v = self.cayley(self._pull(p, xi))
        return curves.HalfPlaneCurve(self, p, v / abs(v))

    def boundary_direction(self, w):
        v = self.cayley(complex(w))
        e = v / abs(v) if v else 1 + 0j
        if abs(e - 1) < 1e-300:
            return math.inf
        return complex(0.0, self.cayley_inv(e).imag)

    def direction_distance(self, xi, eta):
        a = self.cayley(self._direction(xi))
        b = self.cayley(self._direction(eta))
        return abs(a - b)

    def sample(self, rng, n, radius=0.99):
        r = radius * np.sqrt(rng.random(n))
        v = r * np.exp(2j * np.pi * rng.random(n))
        return list(self.cayley_inv(v))

    def sample_directions(self, rng, n):
        return [self.boundary_direction(self.cayley_inv(0.999999 * e))
                for e in np.exp(2j * np.pi * rng.random(n))]

    def offsets(self, z, r, count, rng):
        c = self.cayley(self.point(z))
        s = np.tanh(r * rng.random(count) / 2)
        w = s * np.exp(2j * np.pi * rng.random(count))
        return list(self.cayley_inv((w + c) / (1 + np.conj(c) * w)))

    def point_to_json(self, z):
        z = complex(z)
        return [z.real, z.imag]

    def point_from_json(self, v):
        return self.point(_complex_pair(v))

    def direction_to_json(self, xi):
        return "inf" if xi == math.inf else [0.0, complex(xi).imag]

    def direction_from_json(self, v):
        if isinstance(v, str):
            return self._direction(v)
        return self._direction(_complex_pair(v))


@dataclass(frozen=True, eq=False)
class ComplexBall(Space):
    """Unit ball of ``C^q``; points are complex numpy vectors."""

    q: int = 2

    kind: ClassVar[str] = "complex_ball"

    def __post_init__(self):
        if int(self.q) < 1:
            raise ValueError("ball dimension must be at least 1")

    def point(self, z):
        z = np.asarray(z, dtype=complex).reshape(-1)
        if z.shape != (self.q,):
            raise DomainError(f"expected a vector in C^{self.q}")
        if not np.sum(np.abs(z) ** 2) < 1:
            raise DomainError("point is not inside the unit ball")
        return z

    @staticmethod
    def phi(a, z):
        """Involutive automorphism exchanging ``a`` and 0; ``z`` may be a stack."""
        a = np.asarray(a, dtype=complex)
        z = np.asarray(z, dtype=complex)
        aa = float(np.sum(np.abs(a) ** 2))
        if aa == 0:
            return -z
        za = z @ np.conj(a)
        pz = za[..., None] / aa * a
        s = math.sqrt(1 - aa)
        return (a - pz - s * (z - pz)) / (1 - za)[..., None]

    def _dist(self, z, w):
        z = np.atleast_2d(z)
        w = np.atleast_2d(w)
        zz = np.sum(np.abs(z) ** 2, axis=-1)
        ww = np.sum(np.abs(w) ** 2, axis=-1)
        delta = w - z
        dz = np.abs(np.sum(delta * np.conj(z), axis=-1)) ** 2
        dd = np.sum(np.abs(delta) ** 2, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            par = np.where(zz > 0, dz / np.where(zz > 0, zz, 1.0), 0.0)
        num = np.where(zz > 0, par + (1 - zz) * np.maximum(dd - par, 0.0), dd)
        den = np.abs(1 - np.sum(w * np.conj(z), axis=-1))
        rho = np.sqrt(num) / den
        omr = (1 - zz) * (1 - ww) / den**2
        return _near_far(rho, omr)

    def distance(self, z, w):
        return float(self._dist(self.point(z), self.point(w))[0])

    def distances(self, zs, w):
        return self._dist(np.asarray(zs, dtype=complex), self.point(w)[None, :])

    def pair_distances(self, zs, ws):
        return self._dist(np.asarray(zs, dtype=complex), np.asarray(ws, dtype=complex))

    def geodesic_between(self, x, y):
        x, y = self.point(x), self.point(y)
        v = self.phi(x, y)
        nv = np.linalg.norm(v)
        u = v / nv if nv > 0 else np.eye(self.q, dtype=complex)[0]
        return curves.BallCurve(self, x, u, self.distance(x, y))

    def _unit(self, xi):
        xi = np.asarray(xi, dtype=complex).reshape(-1)
        if xi.shape != (self.q,) or abs(np.linalg.norm(xi) - 1) > 1e-9:
            raise DomainError("boundary direction must be a unit vector")
        return xi / np.linalg.norm(xi)

    def ray_to(self, p, xi):
        p = self.point(p)
        v = self.phi(p, self._unit(xi))
        return curves.BallCurve(self, p, v / np.linalg.norm(v))

    def boundary_direction(self, z):
        z = np.asarray(z, dtype=complex)
        n = np.linalg.norm(z)
        return z / n if n > 0 else np.eye(self.q, dtype=complex)[0]

    def direction_distance(self, xi, eta):
        return float(np.linalg.norm(np.asarray(xi) - np.asarray(eta)))

    def _gauss_dirs(self, rng, n):
        g = rng.standard_normal((n, self.q)) + 1j * rng.standard_normal((n, self.q))
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    def sample(self, rng, n, radius=0.99):
        r = radius * rng.random(n) ** (1.0 / (2 * self.q))
        return list(r[:, None] * self._gauss_dirs(rng, n))

    def sample_directions(self, rng, n):
        return list(self._gauss_dirs(rng, n))

    def offsets(self, z, r, count, rng):
        z = self.point(z)
        s = np.tanh(r * rng.random(count) / 2)
        w = s[:, None] * self._gauss_dirs(rng, count)
        return list(self.phi(z, w))

    def descriptor(self):
        return {"kind": self.kind, "q": int(self.q)}

    def point_to_json(self, z):
        return [[float(c.real), float(c.imag)] for c in np.asarray(z, dtype=complex)]

    def point_from_json(self, v):
        return self.point([_complex_pair(c) for c in v])

    def direction_to_json(self, xi):
        return self.point_to_json(xi)

    def direction_from_json(self, v):
        return self._unit([_complex_pair(c) for c in v])


@dataclass(frozen=True, eq=False)
class KleinEllipsoid(Space):
    """Ellipsoid ``{x : x^T M x < 1}`` in ``R^n`` with its Hilbert metric.

    ``M = L L^T`` and ``k = L^T x`` carries the ellipsoid onto the unit ball;
    the Hilbert metric is projectively invariant, so all formulas run on the
    ball.  ``hyperboloid`` lifts ball points to ``(1, k) / sqrt(1 - |k|^2)``.
    """

    n: int = 2
    shape: tuple = None
    _L: np.ndarray = field(init=False, repr=False, default=None)

    kind: ClassVar[str] = "klein_ellipsoid"

    def __post_init__(self):
        M = np.eye(self.n) if self.shape is None else np.asarray(self.shape, dtype=float)
        if M.shape != (self.n, self.n) or not np.allclose(M, M.T):
            raise ValueError("shape must be a symmetric n x n matrix")
        try:
            L = np.linalg.cholesky(M)
        except np.linalg.LinAlgError as exc:
            raise ValueError("shape must be positive definite") from exc
        object.__setattr__(self, "shape", tuple(map(tuple, M.tolist())))
        object.__setattr__(self, "_L", L)

    def to_ball(self, x):
        return np.asarray(x, dtype=float) @ self._L

    def from_ball(self, k):
        return np.linalg.solve(self._L.T, np.asarray(k, dtype=float).T).T

    def point(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape != (self.n,):
            raise DomainError(f"expected a vector in R^{self.n}")
        if not np.sum(self.to_ball(x) ** 2) < 1:
            raise DomainError("point is not inside the ellipsoid")
        return x

    def hyperboloid(self, xs):
        k = self.to_ball(np.atleast_2d(xs))
        s = np.sqrt(1 - np.sum(k**2, axis=-1))
        return np.concatenate([np.ones((len(k), 1)), k], axis=1) / s[:, None]

    @staticmethod
    def _hilbert(kx, ky):
        kx = np.atleast_2d(kx)
        ky = np.atleast_2d(ky)
        diff = ky - kx
        D = np.linalg.norm(diff, axis=-1)
        out = np.zeros(np.broadcast(D, D).shape)
        nz = D > 0
        if not np.any(nz):
            return out
        kxn = np.broadcast_to(kx, diff.shape)[nz]
        u = diff[nz] / D[nz, None]
        b = np.sum(kxn * u, axis=-1)
        c = np.sum(kxn**2, axis=-1) - 1
        root = np.sqrt(b * b - c)
        # stable roots of s^2 + 2 b s + c = 0; s_minus < 0 < D < s_plus
        s_minus = np.where(b > 0, -b - root, c / (-b + root))
        s_plus = np.where(b > 0, c / (-b - root), -b + root)
        Dn = D[nz]
        out[nz] = 0.5 * (-np.log1p(-Dn / s_plus) + np.log1p(Dn / -s_minus))
        return out

    def distance(self, x, y):
        x, y = self.point(x), self.point(y)
        return float(self._hilbert(self.to_ball(x), self.to_ball(y))[0])

    def distances(self, xs, y):
        return self._hilbert(self.to_ball(np.atleast_2d(xs)), self.to_ball(self.point(y))[None, :])

    def pair_distances(self, xs, ys):
        return self._hilbert(self.to_ball(np.atleast_2d(xs)), self.to_ball(np.atleast_2d(ys)))

    def geodesic_between(self, x, y):
        x, y = self.point(x), self.point(y)
        P, Y = self.hyperboloid(x)[0], self.hyperboloid(y)[0]
        D = self.distance(x, y)
        if D > 0:
            V = (Y - math.cosh(D) * P) / math.sinh(D)
        else:
            V = self._tangents(P, np.eye(self.n + 1)[1:2])[0]
        return curves.KleinCurve(self, P, V, D)

    def _unit(self, xi):
        k = self.to_ball(np.asarray(xi, dtype=float).reshape(-1))
        nk = np.linalg.norm(k)
        if k.shape != (self.n,) or abs(nk - 1) > 1e-9:
            raise DomainError("boundary direction must lie on the ellipsoid boundary")
        return k / nk

    def ray_to(self, p, xi):
        P = self.hyperboloid(self.point(p))[0]
        N = np.concatenate([[1.0], self._unit(xi)])
        c = float(curves._lorentz(N, P))
        V = (N + c * P) / (-c)
        return curves.KleinCurve(self, P, V)

    def boundary_direction(self, x):
        k = self.to_ball(x)
        nk = np.linalg.norm(k)
        k = k / nk if nk > 0 else np.eye(self.n)[0]
        return self.from_ball(k)

    def direction_distance(self, xi, eta):
        return float(np.linalg.norm(np.asarray(xi) - np.asarray(eta)))

    def _ball_dirs(self, rng, n):
        g = rng.standard_normal((n, self.n))
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    def sample(self, rng, n, radius=0.99):
        r = radius * rng.random(n) ** (1.0 / self.n)
        return list(self.from_ball(r[:, None] * self._ball_dirs(rng, n)))

    def sample_directions(self, rng, n):
        return list(self.from_ball(self._ball_dirs(rng, n)))

    @staticmethod
    def _tangents(P, W):
        T = W + curves._lorentz(W, P)[:, None] * P
        return T / np.sqrt(curves._lorentz(T, T))[:, None]

    def offsets(self, z, r, count, rng):
        P = self.hyperboloid(self.point(z))[0]
        T = self._tangents(P, rng.standard_normal((count, self.n + 1)))
        s = r * rng.random(count)
        X = np.cosh(s)[:, None] * P + np.sinh(s)[:, None] * T
        return list(self.from_ball(X[:, 1:] / X[:, :1]))

    def descriptor(self):
        return {"kind": self.kind, "n": int(self.n), "shape": [list(r) for r in self.shape]}

    def point_to_json(self, x):
        return [float(v) for v in x]

    def direction_to_json(self, xi):
        return [float(v) for v in xi]

    def direction_from_json(self, v):
        return np.asarray(v, dtype=float)


def _sign(b):
    return -1 if b < 0 else 1


@dataclass(frozen=True, eq=False)
class Ladder(Space):
    """Two rails ``R>=0 x {-1, 1}`` joined by rungs ``{k} x [-1, 1]`` at every integer k >= 0.

    Points are pairs ``(a, b)``; arithmetic is generic, so ``Fraction``
    inputs give exact distances.  Directions are rail signs ``+1``/``-1``;
    ``"end"`` names the single Gromov end.
    """

    kind: ClassVar[str] = "ladder"
    convex: ClassVar[bool] = False
    approaching_geodesics: ClassVar[bool] = False

    def point(self, x):
        try:
            a, b = x
        except (TypeError, ValueError) as exc:
            raise DomainError(f"{x!r} is not a ladder point") from exc
        if isinstance(a, (np.floating, np.integer)):
            a = float(a)
        if isinstance(b, (np.floating, np.integer)):
            b = float(b)
        if a < 0 or b < -1 or b > 1:
            raise DomainError(f"{x!r} lies outside the ladder")
        if abs(b) != 1 and a != math.floor(a):
            raise DomainError(f"{x!r} is off the rails and not on a rung")
        return (a, b)

    @staticmethod
    def _on_rail(x):
        return abs(x[1]) == 1

    @staticmethod
    def _anchors(x):
        """Vertices ``(k, eps)`` bounding the edge containing ``x``, with the cost to reach each."""
        a, b = x
        if abs(b) != 1:
            return [((a, 1), 1 - b), ((a, -1), 1 + b)]
        lo = math.floor(a)
        hi = math.ceil(a)
        if lo == hi:
            return [((lo, b), 0)]
        return [((lo, b), a - lo), ((hi, b), hi - a)]

    @staticmethod
    def _vertex_distance(u, v):
        return abs(u[0] - v[0]) + (0 if u[1] == v[1] else 2)

    def _direct(self, x, y):
        (a1, b1), (a2, b2) = x, y
        if b1 == b2 and abs(b1) == 1:
            return abs(a1 - a2)
        if a1 == a2 and (abs(b1) != 1 or abs(b2) != 1 or a1 == math.floor(a1)):
            return abs(b1 - b2)
        return None

    def _best_route(self, x, y):
        best, route = self._direct(x, y), None
        for u, cu in self._anchors(x):
            for v, cv in self._anchors(y):
                total = cu + self._vertex_distance(u, v) + cv
                if best is None or total < best:
                    best, route = total, (u, v)
        return best, route

    def distance(self, x, y):
        x, y = self.point(x), self.point(y)
        da = abs(x[0] - y[0])
        if da > 1:
            return 2 + da - abs(x[1] + y[1])
        return self._best_route(x, y)[0]

    def geodesic_between(self, x, y):
        x, y = self.point(x), self.point(y)
        _, route = self._best_route(x, y)
        if route is None:
            return curves.PolylineCurve(self, [x, y])
        u, v = route
        pts = [x, u]
        if u[1] != v[1]:
            pts.append((u[0], v[1]))
        pts += [v, y]
        return curves.PolylineCurve(self, pts)

    def _rail(self, p, xi):
        if xi == "end":
            return _sign(p[1])
        if xi not in (1, -1):
            raise DomainError(f"ladder direction must be +1, -1 or 'end', got {xi!r}")
        return int(xi)

    def ray_to(self, p, xi):
        p = self.point(p)
        eps = self._rail(p, xi)
        a, b = p
        if b == eps:
            pts = [p]
        elif b == -eps:
            k = math.ceil(a)
            pts = [p, (k, b), (k, eps)]
        else:
            pts = [p, (a, eps)]
        return curves.PolylineCurve(self, pts, tail_rail=eps)

    def boundary_direction(self, x):
        return "end"

    def direction_distance(self, xi, eta):
        return 0.0

    def sample_directions(self, rng, n):
        return ["end"] * n

    def sample(self, rng, n, radius=10, exact=False):
        """Random points with ``a <= radius``; half on rails, half on rungs."""
        out = []
        for _ in range(n):
            if rng.random() < 0.5:
                a = rng.random() * radius
                b = 1 if rng.random() < 0.5 else -1
                if exact:
                    a = Fraction(int(a * 64), 64)
            else:
                a = int(rng.integers(0, int(radius) + 1))
                b = 2 * rng.random() - 1
                if exact:
                    b = Fraction(int(round(b * 64)), 64)
            out.append((a, b))
        return out

    def offsets(self, z, r, count, rng):
        a, b = self.point(z)
        out = []
        for _ in range(count):
            s = r * (2 * rng.random() - 1)
            if abs(b) == 1 and (a != math.floor(a) or rng.random() < 0.5):
                out.append((max(a + s, 0.0), b))
            else:
                out.append((a, min(max(b + s, -1.0), 1.0)))
        return out

    def point_to_json(self, x):
        return [float(x[0]), float(x[1])]

    def point_from_json(self, v):
        a, b = v
        return self.point((int(a) if float(a).is_integer() else float(a), float(b)))

    def direction_from_json(self, v):
        return v if v == "end" else int(v)


class FiniteGraph(Space):
    """Weighted undirected graph with shortest-path distance."""

    kind = "finite_graph"
    has_rays = False
    convex = False
    approaching_geodesics = False

    def __init__(self, edges, vertices=()):
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import shortest_path

        names = []
        index = {}
        for v in list(vertices) + [x for e in edges for x in e[:2]]:
            if v not in index:
                index[v] = len(names)
                names.append(v)
        if not names:
            raise ValueError("graph needs at least one vertex")
        weights = {}
        for u, v, w in edges:
            w = float(w)
            if not w > 0 or not math.isfinite(w):
                raise ValueError(f"edge ({u}, {v}) needs a positive finite weight")
            key = (index[u], index[v])
            if u != v:
                weights[key] = min(w, weights.get(key, math.inf))
        n = len(names)
        rows = [i for i, _ in weights] or [0]
        cols = [j for _, j in weights] or [0]
        vals = list(weights.values()) or [0.0]
        mat = coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        dist, pred = shortest_path(mat, method="D", directed=False, return_predecessors=True)
        self.edges = tuple((u, v, float(w)) for u, v, w in edges)
        self.vertices = tuple(names)
        self._index = index
        self._dist = dist
        self._pred = pred

    def point(self, v):
        if v not in self._index:
            raise DomainError(f"{v!r} is not a vertex")
        return v

    def distance(self, x, y):
        d = self._dist[self._index[self.point(x)], self._index[self.point(y)]]
        if math.isinf(d):
            raise UnreachableError(f"{x!r} and {y!r} are in different components")
        return float(d)

    def matrix(self):
        """All-pairs distance matrix in ``self.vertices`` order."""
        return self._dist

    def geodesic_between(self, x, y):
        self.distance(x, y)
        i, j = self._index[x], self._index[y]
        path = [j]
        while path[-1] != i:
            path.append(self._pred[i, path[-1]])
        return curves.GraphPath(self, [self.vertices[k] for k in reversed(path)])

    def sample(self, rng, n, **kw):
        idx = rng.integers(0, len(self.vertices), n)
        return [self.vertices[i] for i in idx]

    def offsets(self, z, r, count, rng):
        i = self._index[self.point(z)]
        near = [self.vertices[j] for j in np.nonzero(self._dist[i] <= r)[0]]
        return [near[k] for k in rng.integers(0, len(near), count)]

    def descriptor(self):
        return {"kind": self.kind, "edges": [list(e) for e in self.edges]}


KINDS = {
    "poincare_disc": lambda d: PoincareDisc(dps=int(d.get("dps", 0))),
    "right_half_plane": lambda d: RightHalfPlane(),
    "complex_ball": lambda d: ComplexBall(q=int(d.get("q", 2))),
    "klein_ellipsoid": lambda d: KleinEllipsoid(n=int(d.get("n", 2)), shape=d.get("shape")),
    "ladder": lambda d: Ladder(),
    "finite_graph": lambda d: FiniteGraph(d["edges"], d.get("vertices", ())),
}


def load_space(descriptor):
    """Build a space from a ``{"kind": ..., parameters...}`` mapping."""
    kind = descriptor.get("kind")
    if kind not in KINDS:
        raise ValueError(f"unknown space kind {kind!r}; expected one of {sorted(KINDS)}")
    try:
        return KINDS[kind](descriptor)
    except KeyError as exc:
        raise ValueError(f"{kind} descriptor is missing field {exc.args[0]!r}") from exc


def distance(space, x, y):
    return float(space.distance(space.point(x), space.point(y)))


def geodesic_between(space, x, y):
    return space.geodesic_between(space.point(x), space.point(y))


def geodesic_ray_to(space, p, xi):
    if not space.has_rays:
        raise CapabilityError(f"{space.kind} has no geodesic rays")
    return space.ray_to(space.point(p), xi)
