# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 kernels for fields ``W act(U) - d*U + b``.

Same API and semantics as :mod:`hopgeo._kernels_py`.  The step loops run
without the GIL so trajectories can be integrated from worker threads.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, isfinite
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()


cdef inline double _act(double u, int kind, double scale) noexcept nogil:
    cdef double e
    if kind == 0:
        if u >= 0:
            return 1.0 / (1.0 + exp(-u))
        e = exp(u)
        return e / (1.0 + e)
    return scale * u


cdef inline double _dact(double u, int kind, double scale) noexcept nogil:
    if kind == 0:
        return _act(u, 0, 1.0) * _act(-u, 0, 1.0)
    return scale


cdef void _field(const double[:, ::1] W, const double[::1] d, const double[::1] b,
                 int kind, double scale, const double[::1] u, double[::1] a,
                 double[::1] out) noexcept nogil:
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i, j
    cdef double s
    for j in range(n):
        a[j] = _act(u[j], kind, scale)
    for i in range(n):
        s = b[i] - d[i] * u[i]
        for j in range(n):
            s += W[i, j] * a[j]
        out[i] = s


def integrate_affine(W, d, b, int kind, double scale, U0, double dt,
                     Py_ssize_t n_steps, double steady_tol, Py_ssize_t record_every):
    cdef const double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    cdef const double[::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = dv.shape[0]
    cdef Py_ssize_t max_rows = n_steps // record_every + 2
    rows_arr = np.empty((max_rows, n))
    steps_arr = np.empty(max_rows, dtype=np.int64)
    cdef double[:, ::1] rows = rows_arr
    cdef cnp.int64_t[::1] steps = steps_arr
    cdef double[::1] u = np.array(U0, dtype=np.float64)
    cdef double[::1] tmp = np.empty(n)
    cdef double[::1] unew = np.empty(n)
    cdef double[::1] act = np.empty(n)
    cdef double[::1] k1 = np.empty(n)
    cdef double[::1] k2 = np.empty(n)
    cdef double[::1] k3 = np.empty(n)
    cdef double[::1] k4 = np.empty(n)
    cdef Py_ssize_t k = 0, m = 0, i
    cdef int status = 0
    cdef Py_ssize_t fail_step = -1
    cdef double mx
    cdef bint finite

    with nogil:
        while True:
            _field(Wv, dv, bv, kind, scale, u, act, k1)
            mx = 0.0
            for i in range(n):
                if fabs(k1[i]) > mx:
                    mx = fabs(k1[i])
            if mx < steady_tol:
                status = 1
                break
            if k == n_steps:
                break
            if k % record_every == 0:
                for i in range(n):
                    rows[m, i] = u[i]
                steps[m] = k
                m += 1
            for i in range(n):
                tmp[i] = u[i] + 0.5 * dt * k1[i]
            _field(Wv, dv, bv, kind, scale, tmp, act, k2)
            for i in range(n):
                tmp[i] = u[i] + 0.5 * dt * k2[i]
            _field(Wv, dv, bv, kind, scale, tmp, act, k3)
            for i in range(n):
                tmp[i] = u[i] + dt * k3[i]
            _field(Wv, dv, bv, kind, scale, tmp, act, k4)
            finite = True
            for i in range(n):
                unew[i] = u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                if not isfinite(unew[i]):
                    finite = False
            if not finite:
                status = 2
                fail_step = k + 1
                break
            for i in range(n):
                u[i] = unew[i]
            k += 1
        if m == 0 or steps[m - 1] != k:
            for i in range(n):
                rows[m, i] = u[i]
            steps[m] = k
            m += 1

    return rows_arr[:m].copy(), steps_arr[:m].copy(), status, fail_step


cdef void _tangent(const double[:, ::1] W, const double[::1] d, int kind, double scale,
                   const double[::1] u, double[:, ::1] M, double[:, ::1] T,
                   double[:, ::1] out) noexcept nogil:
    # out = W (diag(act'(u)) M) - diag(d) M, the product through BLAS.
    # Row-major X is column-major X^T, so out^T = T^T W^T is dgemm("N", "N").
    cdef int n = <int>u.shape[0]
    cdef Py_ssize_t i, c
    cdef double a
    cdef double one = 1.0, zero = 0.0
    cdef char trans = b"N"
    for i in range(n):
        a = _dact(u[i], kind, scale)
        for c in range(n):
            T[i, c] = a * M[i, c]
    dgemm(&trans, &trans, &n, &n, &n, &one, &T[0, 0], &n, <double*>&W[0, 0], &n, &zero, &out[0, 0], &n)
    for i in range(n):
        for c in range(n):
            out[i, c] -= d[i] * M[i, c]


def integrate_affine_variational(W, d, b, int kind, double scale, U0, double dt, Py_ssize_t n_steps):
    cdef const double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    cdef const double[::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = dv.shape[0]
    states_arr = np.empty((n_steps + 1, n))
    cdef double[:, ::1] states = states_arr
    M_arr = np.eye(n)
    cdef double[:, ::1] M = M_arr
    cdef double[::1] u = np.array(U0, dtype=np.float64)
    cdef double[::1] tmp = np.empty(n)
    cdef double[::1] act = np.empty(n)
    cdef double[:, ::1] ku = np.empty((4, n))
    cdef double[:, :, ::1] km = np.empty((4, n, n))
    cdef double[:, ::1] Mtmp = np.empty((n, n))
    cdef double[:, ::1] T = np.empty((n, n))
    cdef double[::1] unew = np.empty(n)
    cdef double[:, ::1] Mnew = np.empty((n, n))
    cdef double[4] frac
    frac[0] = 0.0
    frac[1] = 0.5
    frac[2] = 0.5
    frac[3] = 1.0
    cdef Py_ssize_t k, s, i, j
    cdef int status = 0
    cdef Py_ssize_t fail_step = -1
    cdef Py_ssize_t done = 0
    cdef bint finite

    with nogil:
        for i in range(n):
            states[0, i] = u[i]
        for k in range(n_steps):
            for s in range(4):
                for i in range(n):
                    tmp[i] = u[i]
                    for j in range(n):
                        Mtmp[i, j] = M[i, j]
                if s > 0:
                    for i in range(n):
                        tmp[i] += frac[s] * dt * ku[s - 1, i]
                        for j in range(n):
                            Mtmp[i, j] += frac[s] * dt * km[s - 1, i, j]
                _field(Wv, dv, bv, kind, scale, tmp, act, ku[s])
                _tangent(Wv, dv, kind, scale, tmp, Mtmp, T, km[s])
            finite = True
            for i in range(n):
                unew[i] = u[i] + dt / 6.0 * (ku[0, i] + 2.0 * ku[1, i] + 2.0 * ku[2, i] + ku[3, i])
                if not isfinite(unew[i]):
                    finite = False
                for j in range(n):
                    Mnew[i, j] = M[i, j] + dt / 6.0 * (km[0, i, j] + 2.0 * km[1, i, j] + 2.0 * km[2, i, j] + km[3, i, j])
                    if not isfinite(Mnew[i, j]):
                        finite = False
            if not finite:
                status = 2
                fail_step = k + 1
                break
            for i in range(n):
                u[i] = unew[i]
                states[k + 1, i] = u[i]
                for j in range(n):
                    M[i, j] = Mnew[i, j]
            done = k + 1

    return states_arr[:done + 1].copy(), M_arr.copy(), status, fail_step
