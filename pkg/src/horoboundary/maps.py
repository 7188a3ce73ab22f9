"""Non-expanding self-maps with construction-time validation."""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .errors import MapValidationError, SolverError
from .spaces import ComplexBall, Ladder, PoincareDisc, RightHalfPlane

VALIDATION_PAIRS = 10_000
VALIDATION_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class MapHandle:
    """A validated non-expanding map ``fn`` of ``space``; ``inverse`` is set for closed-form preimages."""

    space: object
    rule: str
    params: dict
    fn: object = field(repr=False)
    inverse: object = field(default=None, repr=False)
    isometry: bool = False
    worst_expansion: float = 0.0

    def __call__(self, x):
        return self.fn(x)

    def descriptor(self):
        return {"rule": self.rule, **self.params}


def validate_nonexpanding(space, fn, pairs=VALIDATION_PAIRS, slack=VALIDATION_SLACK, seed=12345):
    """Worst ``d(f x, f y) - d(x, y)`` over random pairs; raises when it exceeds ``slack``."""
    rng = np.random.default_rng(seed)
    check_space = PoincareDisc() if isinstance(space, PoincareDisc) and space.dps else space
    xs = check_space.sample(rng, pairs)
    ys = check_space.sample(rng, pairs)
    fx = [fn(x) for x in xs]
    fy = [fn(y) for y in ys]
    d0 = check_space.pair_distances(xs, ys)
    d1 = check_space.pair_distances(fx, fy)
    excess = d1 - d0 - slack * (1 + d0)
    i = int(np.argmax(excess))
    if excess[i] > 0:
        raise MapValidationError(
            f"map expands distance at ({xs[i]!r}, {ys[i]!r}): {d1[i]} > {d0[i]}"
        )
    return float(np.max(d1 - d0))


def _make(space, rule, params, fn, inverse=None, isometry=False, validate=True, check_fn=None):
    worst = validate_nonexpanding(space, check_fn or fn) if validate else 0.0
    return MapHandle(space, rule, params, fn, inverse, isometry, worst)


def identity(space, validate=True):
    return _make(space, "identity", {}, lambda x: x, lambda x: x, True, validate)


def _unit(z):
    z = complex(z)
    if abs(abs(z) - 1) > 1e-9:
        raise ValueError(f"{z} is not on the unit circle")
    return z / abs(z)


def mobius_disc(space, attracting=1, repelling=-1, multiplier=2.0, validate=True):
    """Hyperbolic disc automorphism with boundary fixed points ``attracting`` and ``repelling``.

    ``(f(z) - a) / (f(z) - b) = (z - a) / (k (z - b))``; its translation
    length is ``log k``.
    """
    if not isinstance(space, PoincareDisc):
        raise ValueError("mobius_disc needs a Poincare disc")
    k = float(multiplier)
    if not k > 1:
        raise ValueError("multiplier must exceed 1")
    a0, b0 = _unit(attracting), _unit(repelling)
    if abs(a0 - b0) < 1e-9:
        raise ValueError("fixed points must differ")
    m = space._m
    if space.dps:
        # renormalize at working precision so the fixed points lie on the circle
        a, b = (m.mpc(z) / abs(m.mpc(z)) for z in (a0, b0))
    else:
        a, b = a0, b0

    def conj(z, s, a=a, b=b):
        q = (z - a) / (s * (z - b))
        return (a - q * b) / (1 - q)

    params = {"fixed_points": [[a0.real, a0.imag], [b0.real, b0.imag]], "multiplier": k}
    return _make(space, "mobius_disc", params, lambda z: conj(z, k), lambda z: conj(z, 1 / k),
                 True, validate, check_fn=lambda z: conj(z, k, a0, b0))


def rotation_disc(space, angle, validate=True):
    if not isinstance(space, PoincareDisc):
        raise ValueError("rotation_disc needs a Poincare disc")
    m = space._m
    u0 = cmath.exp(1j * angle)
    u = m.exp(m.mpc(0, angle)) if space.dps else u0
    return _make(space, "rotation_disc", {"angle": float(angle)}, lambda z: u * z,
                 lambda z: z / u, True, validate, check_fn=lambda z: u0 * z)


def halfplane_affine(space, k=1.0, c=0.0, validate=True):
    """``w -> k w + c`` with ``k > 0`` and ``Re c >= 0``."""
    if not isinstance(space, RightHalfPlane):
        raise ValueError("halfplane_affine needs the right half-plane")
    k, c = float(k), complex(c)
    if not k > 0 or c.real < 0:
        raise ValueError("need k > 0 and Re c >= 0")

    def inv(w):
        z = (w - c) / k
        if not z.real > 0:
            raise SolverError(f"{w} has no preimage in the half-plane")
        return z

    params = {"k": k, "c": [c.real, c.imag]}
    return _make(space, "halfplane_affine", params, lambda w: k * w + c, inv, c.real == 0, validate)


def ladder_f1(space, validate=True):
    """``(a, b) -> (a + 1, 1)``."""
    if not isinstance(space, Ladder):
        raise ValueError("ladder_f1 needs the ladder")
    return _make(space, "ladder_f1", {}, lambda x: (x[0] + 1, 1), None, False, validate)


def ladder_f2(space, validate=True):
    """``(a, b) -> (a + 1, -b)``, an isometric embedding."""
    if not isinstance(space, Ladder):
        raise ValueError("ladder_f2 needs the ladder")

    def inv(x):
        a, b = x
        if a < 1:
            raise SolverError(f"{x!r} is not in the image of ladder_f2")
        return (a - 1, -b)

    return _make(space, "ladder_f2", {}, lambda x: (x[0] + 1, -x[1]), inv, True, validate)


def graph_table(space, table, validate=True):
    """Vertex self-map given as a dict."""
    table = dict(table)
    missing = [v for v in space.vertices if v not in table]
    if missing:
        raise ValueError(f"map table misses vertices {missing}")
    for v in table.values():
        space.point(v)
    # exhaustive check; a finite graph has few pairs
    worst = 0.0
    for u in space.vertices:
        for v in space.vertices:
            e = space.distance(table[u], table[v]) - space.distance(u, v)
            if e > VALIDATION_SLACK:
                raise MapValidationError(f"map expands the pair ({u!r}, {v!r})")
            worst = max(worst, e)
    preimages = {}
    for u, v in table.items():
        preimages.setdefault(v, u)

    def inv(x):
        if x not in preimages:
            raise SolverError(f"{x!r} has no preimage")
        return preimages[x]

    params = {"table": [[k, v] for k, v in table.items()]}
    return MapHandle(space, "graph_table", params, table.__getitem__, inv, False, worst)


def ball_automorphism(space, a, U=None, validate=True):
    """``z -> U phi_a(z)`` with ``phi_a`` the involution exchanging ``a`` and 0."""
    if not isinstance(space, ComplexBall):
        raise ValueError("ball_automorphism needs the complex ball")
    a = space.point(a)
    U = np.eye(space.q, dtype=complex) if U is None else np.asarray(U, dtype=complex)
    if not np.allclose(U.conj().T @ U, np.eye(space.q)):
        raise ValueError("U must be unitary")
    params = {"a": space.point_to_json(a), "U": [[[c.real, c.imag] for c in row] for row in U]}
    return _make(space, "ball_automorphism", params, lambda z: U @ space.phi(a, z),
                 lambda z: space.phi(a, U.conj().T @ z), True, validate)


def composite(*maps, validate=True):
    """``maps[0]`` applied last: ``composite(f, g)(x) = f(g(x))``."""
    if not maps:
        raise ValueError("need at least one map")
    space = maps[0].space

    def fn(x):
        for m in reversed(maps):
            x = m(x)
        return x

    inverse = None
    if all(m.inverse is not None for m in maps):
        def inverse(x):
            for m in maps:
                x = m.inverse(x)
            return x

    params = {"maps": [m.descriptor() for m in maps]}
    return _make(space, "composite", params, fn, inverse, all(m.isometry for m in maps), validate)


RULES = {
    "identity": lambda s, d: identity(s),
    "mobius_disc": lambda s, d: mobius_disc(
        s, *[complex(*p) for p in d.get("fixed_points", [[1, 0], [-1, 0]])], d.get("multiplier", 2.0)
    ),
    "rotation_disc": lambda s, d: rotation_disc(s, d["angle"]),
    "halfplane_affine": lambda s, d: halfplane_affine(s, d.get("k", 1.0), complex(*d.get("c", [0, 0]))),
    "ladder_f1": lambda s, d: ladder_f1(s),
    "ladder_f2": lambda s, d: ladder_f2(s),
    "graph_table": lambda s, d: graph_table(s, {k: v for k, v in d["table"]}),
    "ball_automorphism": lambda s, d: ball_automorphism(
        s, [complex(*c) for c in d["a"]],
        None if "U" not in d else [[complex(*c) for c in row] for row in d["U"]],
    ),
    "composite": lambda s, d: composite(*[load_map(s, m) for m in d["maps"]]),
}


def load_map(space, descriptor):
    rule = descriptor.get("rule")
    if rule not in RULES:
        raise ValueError(f"unknown map rule {rule!r}; expected one of {sorted(RULES)}")
    try:
        return RULES[rule](space, descriptor)
    except KeyError as exc:
        raise ValueError(f"{rule} descriptor is missing field {exc.args[0]!r}") from exc


def float_twin(f):
    """The same Möbius rule on a float disc, for quick sampling work."""
    if f.rule == "mobius_disc" and f.space.dps:
        return load_map(PoincareDisc(), f.descriptor())
    return f
