"""Central finite-difference stencils used as numerical oracles."""

import numpy as np

from .errors import NumericalError

DEFAULT_REL_STEP = 1e-4


def axis_steps(x, rel_step=DEFAULT_REL_STEP):
    """Per-axis step ``rel_step * max(1, |x_a|)``."""
    x = np.asarray(x, dtype=float)
    return rel_step * np.maximum(1.0, np.abs(x))


def _finite(value, what):
    value = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(value)):
        raise NumericalError(f"non-finite value in {what} stencil")
    return value


def partial(f, x, axis, h):
    """First partial derivative of ``f`` along ``axis`` (second order)."""
    e = np.zeros_like(x)
    e[axis] = h
    fp = _finite(f(x + e), "first-derivative")
    fm = _finite(f(x - e), "first-derivative")
    return (fp - fm) / (2.0 * h)


def partial5(f, x, axis, h):
    """Fourth-order five-point first derivative along ``axis``."""
    e = np.zeros_like(x)
    e[axis] = h
    f2p = _finite(f(x + 2 * e), "five-point")
    f1p = _finite(f(x + e), "five-point")
    f1m = _finite(f(x - e), "five-point")
    f2m = _finite(f(x - 2 * e), "five-point")
    return (-f2p + 8.0 * f1p - 8.0 * f1m + f2m) / (12.0 * h)


def gradient(f, x, steps=None, accurate=False):
    x = np.asarray(x, dtype=float)
    if steps is None:
        steps = axis_steps(x)
    rule = partial5 if accurate else partial
    return np.array([rule(f, x, a, steps[a]) for a in range(x.size)])


def jacobian(field, x, steps=None):
    """Jacobian ``J[i, a] = d field_i / d x_a`` by central differences."""
    x = np.asarray(x, dtype=float)
    if steps is None:
        steps = axis_steps(x)
    cols = [partial(field, x, a, steps[a]) for a in range(x.size)]
    return np.stack(cols, axis=-1)


def second_partial(f, x, axis, h, f0=None):
    e = np.zeros_like(x)
    e[axis] = h
    if f0 is None:
        f0 = f(x)
    fp = _finite(f(x + e), "second-derivative")
    fm = _finite(f(x - e), "second-derivative")
    return (fp - 2.0 * f0 + fm) / (h * h)


def hessian(f, x, steps=None):
    """Symmetric Hessian of a scalar function by central differences."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if steps is None:
        steps = axis_steps(x)
    f0 = float(_finite(f(x), "hessian"))
    out = np.empty((n, n))
    for a in range(n):
        out[a, a] = second_partial(f, x, a, steps[a], f0)
        for b in range(a + 1, n):
            ea = np.zeros(n)
            eb = np.zeros(n)
            ea[a] = steps[a]
            eb[b] = steps[b]
            vals = [f(x + ea + eb), f(x + ea - eb), f(x - ea + eb), f(x - ea - eb)]
            fpp, fpm, fmp, fmm = _finite(vals, "mixed-derivative")
            out[a, b] = out[b, a] = (fpp - fpm - fmp + fmm) / (4.0 * steps[a] * steps[b])
    return out
