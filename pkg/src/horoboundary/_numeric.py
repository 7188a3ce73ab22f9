"""Small numeric helpers shared across modules."""
import math

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConvergenceError


class FloatMath:
    """math-module shim with the same call surface as an mpmath context."""

    log = staticmethod(math.log)
    log1p = staticmethod(math.log1p)
    atanh = staticmethod(math.atanh)
    sqrt = staticmethod(math.sqrt)
    tanh = staticmethod(math.tanh)
    cosh = staticmethod(math.cosh)
    sinh = staticmethod(math.sinh)
    exp = staticmethod(math.exp)
    pi = math.pi

    @staticmethod
    def mpc(re, im=0.0):
        return complex(re, im)

    @staticmethod
    def mpf(x):
        return float(x)


FLOAT = FloatMath()


def minimize_on_interval(fun, lo, hi, *, grid_step=None, xtol=1e-12, maxiter=500):
    """Minimize a scalar function on ``[lo, hi]``.

    With ``grid_step`` set, a coarse scan first locates the best cell and the
    bounded Brent refinement runs on the two neighbouring cells only; this
    guards against non-unimodal objectives (piecewise-linear ladder distances).
    Returns ``(argmin, minimum)``.
    """
    lo, hi = float(lo), float(hi)
    if hi <= lo:
        return lo, float(fun(lo))
    if grid_step is not None:
        n = int(min(max(math.ceil((hi - lo) / grid_step), 8), 4000))
        xs = np.linspace(lo, hi, n + 1)
        vals = np.array([float(fun(x)) for x in xs])
        i = int(np.argmin(vals))
        a, b = xs[max(i - 1, 0)], xs[min(i + 1, n)]
        best_x, best_v = float(xs[i]), float(vals[i])
    else:
        a, b = lo, hi
        best_x, best_v = None, math.inf
        for x in (lo, hi):
            v = float(fun(x))
            if v < best_v:
                best_x, best_v = x, v
    res = minimize_scalar(
        lambda s: float(fun(s)), bounds=(a, b), method="bounded",
        options={"xatol": xtol, "maxiter": maxiter},
    )
    if not res.success:
        raise ConvergenceError(f"bounded minimization failed on [{a}, {b}]: {res.message}")
    if res.fun <= best_v:
        return float(res.x), float(res.fun)
    return best_x, best_v


def canonical_float(x, digits=12):
    """Round to ``digits`` significant digits; the result re-serializes stably."""
    x = float(x)
    if not math.isfinite(x) or x == 0.0:
        return x
    return float(f"{x:.{digits}g}")
