"""Pure-Python RK4 kernels for fields ``W act(U) - d*U + b``.

Reference implementation of the API in ``_kernels.pyx``; selected when the
compiled extension is unavailable or ``HOPGEO_BACKEND=python`` is set.

``kind`` picks the activation: 0 is the logistic sigmoid (softplus
potential), 1 is the linear map ``scale * U`` (quadratic potential).

Status codes: 0 reached the step budget, 1 steady state, 2 non-finite state.
"""

import numpy as np
from scipy import special

T_MAX, STEADY, NONFINITE = 0, 1, 2


def _activation(kind, scale):
    if kind == 0:
        return special.expit, lambda u: special.expit(u) * special.expit(-u)
    return (lambda u: scale * u), (lambda u: np.full_like(u, scale))


def integrate_affine(W, d, b, kind, scale, U0, dt, n_steps, steady_tol, record_every):
    """Fixed-step RK4 from ``U0``.

    Returns ``(rows, steps, status, fail_step)``: recorded states, the step
    index of each row, the status code and the first non-finite step (-1 if
    none).  Rows are taken every ``record_every`` steps plus the final state.
    """
    W = np.asarray(W, dtype=float)
    d = np.asarray(d, dtype=float)
    b = np.asarray(b, dtype=float)
    act, _ = _activation(kind, scale)

    def f(u):
        return W @ act(u) - d * u + b

    u = np.array(U0, dtype=float)
    rows, steps = [], []
    status, fail_step = T_MAX, -1
    k = 0
    while True:
        k1 = f(u)
        if np.max(np.abs(k1)) < steady_tol:
            status = STEADY
            break
        if k == n_steps:
            break
        if k % record_every == 0:
            rows.append(u.copy())
            steps.append(k)
        k2 = f(u + 0.5 * dt * k1)
        k3 = f(u + 0.5 * dt * k2)
        k4 = f(u + dt * k3)
        u_new = u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        k += 1
        if not np.all(np.isfinite(u_new)):
            status, fail_step = NONFINITE, k
            k -= 1
            break
        u = u_new
    if not steps or steps[-1] != k:
        rows.append(u.copy())
        steps.append(k)
    return np.array(rows), np.array(steps, dtype=np.int64), status, fail_step


def integrate_affine_variational(W, d, b, kind, scale, U0, dt, n_steps):
    """RK4 for the state and its tangent map ``dM/dt = DF(U) M``, ``M(0) = I``.

    Returns ``(states, M, status, fail_step)`` with every step's state.
    """
    W = np.asarray(W, dtype=float)
    d = np.asarray(d, dtype=float)
    b = np.asarray(b, dtype=float)
    act, dact = _activation(kind, scale)
    n = d.size

    def f(u, M):
        DF = W * dact(u)[None, :] - np.diag(d)
        return W @ act(u) - d * u + b, DF @ M

    u = np.array(U0, dtype=float)
    M = np.eye(n)
    states = [u.copy()]
    for k in range(n_steps):
        k1u, k1m = f(u, M)
        k2u, k2m = f(u + 0.5 * dt * k1u, M + 0.5 * dt * k1m)
        k3u, k3m = f(u + 0.5 * dt * k2u, M + 0.5 * dt * k2m)
        k4u, k4m = f(u + dt * k3u, M + dt * k3m)
        u_new = u + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        M_new = M + dt / 6.0 * (k1m + 2.0 * k2m + 2.0 * k3m + k4m)
        if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(M_new))):
            return np.array(states), M, NONFINITE, k + 1
        u, M = u_new, M_new
        states.append(u.copy())
    return np.array(states), M, T_MAX, -1
