"""Batch front-end: read a JSON run config, run one analysis, write a canonical report.

Exit codes: 0 all checks pass, 1 some check fails, 2 inconclusive,
3 configuration or capability error.
"""
from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
import warnings

import numpy as np

from . import dynamics as dyn
from . import horofunctions as hf
from . import hyperbolicity as hyp
from .errors import (CapabilityError, ConvergenceError, DomainError, InconclusiveError, MapValidationError,
                     PreconditionError, SamplingError, SolverError)
from .maps import identity, load_map
from .report import Report, emit_report
from .spaces import load_space

ANALYSES = ("delta", "atlas", "rays", "dynamics", "julia", "suite")
FORMATS = ("json", "csv")
CONFIG_ERROR = 3

DEFAULT_TOLERANCES = {
    "atlas": 1e-6,
    "lipschitz": 1e-9,
    "unit_speed": 1e-9,
    "shift_gap": 1e-3,
    "monotone": 1e-9,
    "julia_slack": 1e-6,
    "king_margin": 0.02,
}

# numerical outcomes that leave the question open
UNDECIDED = (InconclusiveError, ConvergenceError, SamplingError, SolverError)


class ConfigError(ValueError):
    pass


class RunConfig:
    """Parsed run configuration; unknown top-level keys are analysis parameters."""

    KEYS = {"space", "map", "analysis", "seed", "tolerances", "out", "format", "params"}

    def __init__(self, data):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        space = data.get("space")
        if isinstance(space, str):
            space = {"kind": space}
        if not isinstance(space, dict):
            raise ConfigError("config needs a 'space' descriptor")
        self.space = space
        m = data.get("map")
        self.map = {"rule": m} if isinstance(m, str) else m
        self.analysis = data.get("analysis")
        if self.analysis not in ANALYSES:
            raise ConfigError(f"analysis must be one of {list(ANALYSES)}, got {self.analysis!r}")
        self.seed = _seed(data.get("seed", 0))
        tol = data.get("tolerances", {})
        unknown = set(tol) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerances {sorted(unknown)}")
        self.tolerances = {**DEFAULT_TOLERANCES, **{k: float(v) for k, v in tol.items()}}
        self.overridden = set(tol)
        self.out = data.get("out")
        self.format = data.get("format", "json")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {list(FORMATS)}")
        self.params = {k: v for k, v in data.items() if k not in self.KEYS}
        self.params.update(data.get("params", {}))

    def tol(self, name):
        src = "config" if name in self.overridden else "artifact default"
        return self.tolerances[name], src


def _seed(v):
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ConfigError(f"seed must be an unsigned integer, got {v!r}")
    return v


def _default_base(space):
    kind = space.kind
    if kind == "ladder":
        return (0, 0)
    if kind == "right_half_plane":
        return 1 + 0j
    if kind == "finite_graph":
        return space.vertices[0]
    if kind in ("complex_ball", "klein_ellipsoid"):
        n = space.q if kind == "complex_ball" else space.n
        return space.point(np.zeros(n, dtype=complex if kind == "complex_ball" else float))
    return space.point(0)


def _default_direction(space):
    kind = space.kind
    if kind == "ladder":
        return "end"
    if kind == "right_half_plane":
        return math.inf
    if kind == "complex_ball":
        e = np.zeros(space.q, dtype=complex)
        e[0] = 1
        return e
    if kind == "klein_ellipsoid":
        e = np.zeros(space.n)
        e[0] = 0.5
        return space.boundary_direction(space.from_ball(e))
    return 1 + 0j


def _param_point(space, params, key, default):
    if key not in params:
        return default
    try:
        return space.point_from_json(params[key])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"parameter {key!r}: {exc}") from exc


def _param_direction(space, params, key, default):
    if key not in params:
        return default
    try:
        return space.direction_from_json(params[key])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"parameter {key!r}: {exc}") from exc


def _dir_json(space, xi):
    return None if xi is None else space.direction_to_json(xi)


# analyses ------------------------------------------------------------------

def run_delta(cfg, space, f, rep):
    n = int(cfg.params.get("n", 2000))
    exhaustive = space.kind == "finite_graph"
    est = hyp.delta_estimate(space, n=n, seed=cfg.seed, exhaustive=exhaustive,
                             radius=cfg.params.get("radius"))
    rep.results["delta"] = {
        "value": est.value, "count": est.count, "exhaustive": est.exhaustive,
        "kind": "exact" if est.exhaustive else "lower bound",
        "quadruple": [space.point_to_json(x) for x in est.quadruple],
    }
    rep.check("delta_nonnegative", est.value >= 0, est.value, 0.0)
    if "expect_delta" in cfg.params:
        tol = float(cfg.params.get("delta_tol", 1e-9))
        want = float(cfg.params["expect_delta"])
        rep.check("delta_matches_expected", abs(est.value - want) <= tol, est.value, tol, "config")


def _lipschitz_check(space, grid, values, tol):
    worst = -math.inf
    for i, j in itertools.combinations(range(len(grid)), 2):
        worst = max(worst, abs(values[i] - values[j]) - float(space.distance(grid[i], grid[j])))
    return worst <= tol, worst


def run_atlas(cfg, space, f, rep):
    p = _param_point(space, cfg.params, "p", _default_base(space))
    rng = np.random.default_rng(cfg.seed)
    if space.kind == "ladder":
        grid = hf.ladder_grid()
        directions = cfg.params.get("directions", [-1, -0.5, 0, 0.5, 1])
        atlas = hf.boundary_atlas(space, p, grid, directions=[float(b) for b in directions],
                                  seed=cfg.seed)
    else:
        if not space.has_rays:
            raise CapabilityError(f"{space.kind} has no boundary rays to build an atlas from")
        grid = space.sample(rng, int(cfg.params.get("grid_size", 12)), radius=0.9) \
            if space.kind != "right_half_plane" else space.sample(rng, 12)
        grid = [p] + list(grid)
        atlas = hf.boundary_atlas(space, p, grid, count=int(cfg.params.get("count", 8)),
                                  seed=cfg.seed)
    rep.results["atlas"] = atlas.to_json(space)
    rep.results["atlas"]["cluster_count"] = len(atlas.clusters)
    tol, src = cfg.tol("lipschitz")
    for k, c in enumerate(atlas.clusters):
        ok, worst = _lipschitz_check(space, grid, c.representative, tol)
        rep.check(f"cluster_{k}_lipschitz", ok, worst, tol, src)
    if space.kind == "ladder":
        tol, src = cfg.tol("atlas")
        for k, c in enumerate(atlas.clusters):
            # the closed form is normalized at (0, 0)
            h = hf.ladder_horofunction(c.beta)
            err = max(abs(v - h(x) + h(p)) for x, v in zip(grid, c.representative))
            rep.check(f"cluster_{k}_closed_form", err <= tol, err, tol, src)
    if "expect_clusters" in cfg.params:
        want = int(cfg.params["expect_clusters"])
        rep.check("cluster_count", len(atlas.clusters) == want, len(atlas.clusters), 0, "config")


def _unit_speed(ray, tol):
    # Klein coordinates lose about eps * exp(2 t) per round trip; stay where that is tiny
    ts = np.linspace(0, 5, 11)
    worst = 0.0
    for s, t in itertools.combinations(ts, 2):
        d = ray.dist_to(ray.point(s), t)
        worst = max(worst, abs(d - abs(t - s)) / (1 + abs(t - s)))
    return worst <= tol, worst


def run_rays(cfg, space, f, rep):
    if not space.has_rays:
        raise CapabilityError(f"{space.kind} has no geodesic rays")
    prm = cfg.params
    if space.kind == "ladder":
        p, eta, q, eta2 = (0, 1), 1, (0, -1), -1
    else:
        p, eta = _default_base(space), _default_direction(space)
        q = space.offsets(p, 1.0, 1, np.random.default_rng(cfg.seed))[0]
        eta2 = None
    p = _param_point(space, prm, "p", p)
    q = _param_point(space, prm, "q", q)
    eta = _param_direction(space, prm, "eta", eta)
    eta2 = _param_direction(space, prm, "eta2", eta if eta2 is None else eta2)
    r1, r2 = space.ray_to(p, eta), space.ray_to(q, eta2)
    tol, src = cfg.tol("unit_speed")
    for name, r in (("ray1", r1), ("ray2", r2)):
        ok, worst = _unit_speed(r, tol)
        rep.check(f"{name}_unit_speed", ok, worst, tol, src)
    # float Klein points stop resolving the boundary near t = 17
    horizon = float(prm.get("horizon", 12 if space.kind == "klein_ellipsoid" else 20))
    a = hyp.asymptotic(r1, r2, horizon=max(horizon, 10.0))
    res = {"p": space.point_to_json(p), "q": space.point_to_json(q),
           "eta1": _dir_json(space, eta), "eta2": _dir_json(space, eta2),
           "asymptotic": {"status": a.status.value, "sup": a.sup, "argsup": a.argsup,
                          "horizon": a.horizon}}
    rep.results["rays"] = res
    if a.status is hyp.Status.INCONCLUSIVE:
        rep.mark_inconclusive("asymptotic", "boundedness undecided at the horizon",
                              {"sup": a.sup})
    final_tol, src = cfg.tol("shift_gap")
    try:
        sh = hyp.extract_shifts(r1, r2, horizon=horizon, final_tol=final_tol)
    except InconclusiveError as exc:
        rep.mark_inconclusive("shifts", exc, getattr(exc, "detail", {}))
        return
    if isinstance(sh, hyp.NotStronglyAsymptotic):
        res["strongly_asymptotic"] = False
        res["gap_floor"] = sh.gap_floor
    else:
        res["strongly_asymptotic"] = True
        res["shifts"] = {"T": sh.T, "S": sh.S, "terminal_gap": sh.terminal_gap}
        rep.check("shift_terminal_gap", sh.terminal_gap < final_tol, sh.terminal_gap,
                  final_tol, src)


def _start(space, prm, p):
    if "x" in prm:
        return space.point_from_json(prm["x"])
    return (0, 1) if space.kind == "ladder" else p


def _work_map(f):
    # long float-disc orbits run out of precision; iterate a 120-digit twin
    return dyn._precise(f, dps=120)


def _displacement_points(space, f, cfg):
    if space.kind == "ladder":
        # rails at resolution 0.05 plus rungs at the same resolution
        pts = [(a / 20, e) for a in range(0, 201) for e in (1, -1)]
        pts += [(a, b / 20) for a in range(11) for b in range(-20, 21)]
        return pts
    if space.kind == "finite_graph":
        return list(space.vertices)
    return None


def run_dynamics(cfg, space, f, rep):
    if f is None:
        raise ConfigError("dynamics needs a map descriptor")
    prm = cfg.params
    p = _param_point(space, prm, "p", _default_base(space))
    x = _start(space, prm, p)
    horizon = int(prm.get("horizon", 64))
    g = _work_map(f)
    gx = x if g is f else g.space.point(complex(x))
    orbit = dyn.iterate(g, gx, horizon)
    out = {"start": space.point_to_json(x), "basepoint": space.point_to_json(p),
           "classification": orbit.classification, "return_radius": orbit.radius,
           "horizon": horizon,
           "steps": {str(m): float(v[-1]) for m, v in orbit.steps.items()}}
    rep.results["dynamics"] = out
    tol, src = cfg.tol("monotone")
    for m, v in orbit.steps.items():
        inc = float(np.max(np.diff(v))) if len(v) > 1 else 0.0
        rep.check(f"forward_{m}_step_nonincreasing", inc <= tol * (1 + float(np.max(v))),
                  inc, tol, src)
    for m in dyn.STEPS:
        if 2 * m in orbit.steps:
            # d(x_k, x_{k+2m}) <= d(x_k, x_{k+m}) + d(x_{k+m}, x_{k+2m}) at the last k
            k = len(orbit.steps[2 * m]) - 1
            s1 = float(orbit.steps[m][k] + orbit.steps[m][k + m])
            s2 = float(orbit.steps[2 * m][k])
            rep.check(f"subadditive_{m}", s2 <= s1 + tol * (1 + s1), s2 - s1, tol, src)
    disp = dyn.minimal_displacement(f, _displacement_points(space, f, cfg),
                                    n=int(prm.get("samples", 2000)), seed=cfg.seed)
    out["tau_upper"] = disp.value
    out["tau_argmin"] = space.point_to_json(disp.argmin)
    out["c_estimate"] = None
    out["dilation_log"] = None
    out["denjoy_wolff"] = None
    if orbit.classification == dyn.INCONCLUSIVE:
        rep.mark_inconclusive("classification", "orbit neither bounded nor diverging at the horizon")
        return
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rate = dyn.divergence_rate(g, gx, horizon=max(horizon, 64))
    out["c_estimate"] = rate.value
    out["c_detail"] = {"primary": rate.primary, "secondary": rate.secondary,
                       "discrepancy": rate.discrepancy, "consistent": rate.consistent,
                       "warnings": [str(w.message) for w in caught]}
    # d(x, f^n x) <= 2 d(x, y) + n d(y, f y) for the best sampled y
    slack = 2 * float(space.distance(x, disp.argmin)) / rate.horizon
    rep.check("rate_below_displacement", rate.value <= disp.value + slack + 1e-9, rate.value,
              slack + 1e-9, "triangle inequality")
    if orbit.classification == dyn.BOUNDED:
        return
    rng = np.random.default_rng(cfg.seed)
    starts = [gx, g.space.offsets(gx, 1.0, 1, rng)[0]]
    dw = dyn.denjoy_wolff(g, starts, horizon=max(horizon, 64))
    zeta = dw.direction
    out["denjoy_wolff"] = {"direction": _dir_json(space, zeta), "agreement": dw.agreement,
                           "min_gromov": dw.min_gromov}
    dil = dyn.dilation(f, zeta, p, seed=cfg.seed)
    out["dilation_log"] = dil.value
    out["dilation_detail"] = {"approach": dil.approach, "window": list(dil.window),
                              "spread": dil.spread, "family": dil.family}
    margin, src = cfg.tol("king_margin")
    rep.check("king_inequality", dil.value <= -rate.value + margin, dil.value + rate.value,
              margin, src)


def run_julia(cfg, space, f, rep):
    prm = cfg.params
    if f is None:
        f = identity(space)
    p = _param_point(space, prm, "p", _default_base(space))
    eta = _param_direction(space, prm, "eta", _default_direction(space))
    Rs = prm.get("R", 1.0)
    Rs = Rs if isinstance(Rs, list) else [Rs]
    slack, src = cfg.tol("julia_slack")
    n = int(prm.get("samples", 10_000))
    rows = []
    for R in Rs:
        res = dyn.julia_check(f, eta, p, float(R), n_samples=n, slack=slack, seed=cfg.seed)
        rows.append({"R": float(R), "passed": res.passed, "violations": res.violations,
                     "samples": res.samples, "worst_margin": res.worst_margin,
                     "log_lambda": res.log_lambda, "xi": _dir_json(space, res.xi),
                     "offender": space.point_to_json(res.offender)})
        rep.check(f"julia_R={float(R):g}", res.passed, res.worst_margin, slack, src)
    rep.results["julia"] = {"eta": _dir_json(space, eta), "basepoint": space.point_to_json(p),
                            "radii": rows}


RUNNERS = {"delta": run_delta, "atlas": run_atlas, "rays": run_rays,
           "dynamics": run_dynamics, "julia": run_julia}


def _run_one(name, cfg, space, f, rep):
    try:
        RUNNERS[name](cfg, space, f, rep)
    except UNDECIDED as exc:
        rep.mark_inconclusive(name, exc, getattr(exc, "detail", {}))
    except PreconditionError as exc:
        rep.mark_inconclusive(name, f"precondition not met: {exc}")
    except DomainError as exc:
        rep.mark_inconclusive(name, f"left the representable domain: {exc}")


def run_suite(cfg, space, f, rep):
    skipped = {}
    for name in ("delta", "atlas", "rays", "dynamics", "julia"):
        if name in ("atlas", "rays") and not space.has_rays and space.kind != "ladder":
            skipped[name] = f"{space.kind} has no geodesic rays"
            continue
        if name == "dynamics" and f is None:
            skipped[name] = "no map given"
            continue
        if name == "julia" and not space.has_rays:
            skipped[name] = f"{space.kind} has no boundary"
            continue
        sub = Report()
        _run_one(name, cfg, space, f, sub)
        rep.results.update(sub.results)
        rep.checks.extend(dict(c, name=f"{name}.{c['name']}") for c in sub.checks)
        rep.inconclusive.extend(dict(c, name=f"{name}.{c['name']}") for c in sub.inconclusive)
    rep.results["skipped"] = skipped


def run(cfg):
    """Build the space and map, dispatch the analysis and return the report."""
    try:
        space = load_space(cfg.space)
        f = load_map(space, cfg.map) if cfg.map else None
    except MapValidationError as exc:
        raise ConfigError(f"map failed validation: {exc}") from exc
    rep = Report(cfg.analysis, cfg.seed, space.descriptor(), f.descriptor() if f else None)
    if cfg.analysis == "suite":
        run_suite(cfg, space, f, rep)
    else:
        _run_one(cfg.analysis, cfg, space, f, rep)
    return rep


def _parser():
    ap = argparse.ArgumentParser(prog="horoboundary", description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--seed", type=int, help="overrides the config seed")
    ap.add_argument("--out", help="report path (default: stdout)")
    ap.add_argument("--format", choices=FORMATS, help="report format (default: json)")
    return ap


def load_config(path, seed=None, out=None, fmt=None):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}") from exc
    if isinstance(data, dict):
        if seed is not None:
            data["seed"] = seed
        if out is not None:
            data["out"] = out
        if fmt is not None:
            data["format"] = fmt
    return RunConfig(data)


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.seed, args.out, args.format)
        rep = run(cfg)
    except (ConfigError, CapabilityError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CONFIG_ERROR
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return CONFIG_ERROR
    data = emit_report(rep, cfg.format)
    if cfg.out:
        with open(cfg.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
