# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sLdG kernels; same contract as ``_sldg_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, ceil, fabs, round as cround

from ..errors import SingularJacobian, StepRejected

cnp.import_array()

cdef enum:
    MAXO = 16

cdef enum:
    FIXED = 0
    SECANT = 1
    NEWTON = 2


cdef inline double bary_eval(const double* c, double s, const double* nodes,
                             const double* bary, int o) noexcept nogil:
    cdef double num = 0.0, den = 0.0, t
    cdef int j
    for j in range(o):
        t = s - nodes[j]
        if t == 0.0:
            return c[j]
        t = bary[j] / t
        num += t * c[j]
        den += t
    return num / den


cdef inline void bary_basis(double s, const double* nodes, const double* bary,
                            int o, double* out) noexcept nogil:
    cdef double den = 0.0, t
    cdef int j
    cdef int k
    for j in range(o):
        t = s - nodes[j]
        if t == 0.0:
            for k in range(o):
                out[k] = 0.0
            out[j] = 1.0
            return
    for j in range(o):
        out[j] = bary[j] / (s - nodes[j])
        den += out[j]
    for j in range(o):
        out[j] /= den


cdef inline double eval_row(const double* row, int n_cells, int o, double x, double a,
                            double h, const double* nodes, const double* bary) noexcept nogil:
    cdef double t = (x - a) / h
    cdef double fc = floor(t)
    cdef double s = t - fc
    cdef long cell = <long>fc
    cell = cell % n_cells
    if cell < 0:
        cell += n_cells
    return bary_eval(row + cell * o, s, nodes, bary, o)


cdef int trace_one(const double* row, const double* drow, int n_cells, int o, double x,
                   double a, double h, double shift, const double* nodes, const double* bary,
                   int method, int max_iter, double tol, double* alpha_out,
                   int* iters_out) noexcept nogil:
    """Returns 0 on success, 1 on a singular Newton Jacobian."""
    cdef double alpha = x, prev, g, g_prev, new, den, val, der
    cdef int k = 0
    if max_iter < 1:
        alpha_out[0] = x
        iters_out[0] = 0
        return 0
    if method == FIXED:
        for k in range(max_iter):
            new = x - shift * eval_row(row, n_cells, o, alpha, a, h, nodes, bary)
            den = fabs(new - alpha)
            alpha = new
            if tol > 0 and den <= tol:
                k += 1
                break
        else:
            k = max_iter
    elif method == SECANT:
        g_prev = -shift * eval_row(row, n_cells, o, x, a, h, nodes, bary)
        prev = x
        alpha = x + g_prev
        k = 1
        if not (tol > 0 and fabs(g_prev) <= tol):
            while k < max_iter:
                g = x - shift * eval_row(row, n_cells, o, alpha, a, h, nodes, bary) - alpha
                den = g - g_prev
                if fabs(den) < 1e-300:
                    break
                new = alpha - (alpha - prev) * g / den
                prev = alpha
                g_prev = g
                k += 1
                den = fabs(new - alpha)
                alpha = new
                if tol > 0 and den <= tol:
                    break
    else:
        for k in range(max_iter):
            val = eval_row(row, n_cells, o, alpha, a, h, nodes, bary)
            der = eval_row(drow, n_cells, o, alpha, a, h, nodes, bary)
            den = 1.0 + shift * der
            if fabs(den) < 1e-12:
                alpha_out[0] = alpha
                iters_out[0] = k
                return 1
            new = alpha + (x - shift * val - alpha) / den
            den = fabs(new - alpha)
            alpha = new
            if tol > 0 and den <= tol:
                k += 1
                break
        else:
            k = max_iter
    alpha_out[0] = alpha
    iters_out[0] = k
    return 0


def _derivative_rows(u, dmat, double h):
    return np.ascontiguousarray(np.einsum("rcj,kj->rck", np.asarray(u), np.asarray(dmat)) / h)


def trace_points(u, rows, x, double a, double h, double shift, nodes, bary, dmat,
                 int method, int max_iter, double tol):
    cdef double[:, :, ::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef const long[::1] rv = np.ascontiguousarray(rows, dtype=np.int64)
    cdef const double[::1] xv = np.ascontiguousarray(np.ravel(x), dtype=np.float64)
    cdef const double[::1] nv = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(bary, dtype=np.float64)
    cdef Py_ssize_t P = xv.shape[0], p
    cdef int N = uv.shape[1], o = uv.shape[2], status = 0
    cdef double[:, :, ::1] dv = uv
    if method == NEWTON:
        dv = _derivative_rows(uv, np.ascontiguousarray(dmat, dtype=np.float64), h)
    alpha = np.empty(P)
    iters = np.empty(P, dtype=np.intc)
    cdef double[::1] av = alpha
    cdef int[::1] iv = iters
    cdef Py_ssize_t bad = -1
    with nogil:
        for p in range(P):
            status = trace_one(&uv[rv[p], 0, 0], &dv[rv[p], 0, 0], N, o, xv[p], a, h, shift,
                               &nv[0], &bv[0], method, max_iter, tol, &av[p], &iv[p])
            if status:
                bad = p
                break
    if bad >= 0:
        raise SingularJacobian(float(xv[bad]), int(rv[bad]))
    return alpha.reshape(np.shape(x)), iters.astype(np.int64).reshape(np.shape(x))


def sldg_rows(u, double a, double h, double shift, nodes, weights, bary, left, right, dmat,
              int method, int max_iter, double tol):
    cdef double[:, :, ::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[::1] nv = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(bary, dtype=np.float64)
    cdef const double[::1] lv = np.ascontiguousarray(left, dtype=np.float64)
    cdef const double[::1] rgt = np.ascontiguousarray(right, dtype=np.float64)
    cdef int R = uv.shape[0], N = uv.shape[1], o = uv.shape[2]
    if o > MAXO:
        raise ValueError("order too large for compiled kernel")
    cdef double[:, :, ::1] dv = uv
    if method == NEWTON:
        dv = _derivative_rows(uv, np.ascontiguousarray(dmat, dtype=np.float64), h)
    out = np.zeros((R, N, o))
    cdef double[:, :, ::1] ov = out
    ut_arr = np.empty(N + 1)
    cdef double[::1] ut = ut_arr
    cdef double xq[MAXO]
    cdef double vals[MAXO]
    cdef double phi[MAXO]
    cdef double alpha, A, B, lo, c, d, width, sloc, acc, period_shift
    cdef int r, i, j, l, q, it, status = 0, max_used = 0
    cdef long m, mlo, mhi, mw
    cdef int bad_row = -1, bad_cell = -1, bad_kind = 0
    cdef double bad_x = 0.0
    cdef const double* row
    cdef const double* drow
    with nogil:
        for r in range(R):
            row = &uv[r, 0, 0]
            drow = &dv[r, 0, 0]
            for i in range(N):
                A = 0.0
                c = 0.0
                for j in range(o):
                    A += uv[r, i, j] * lv[j]
                    c += uv[r, (i - 1 + N) % N, j] * rgt[j]
                ut[i] = 0.5 * (A + c)
            ut[N] = ut[0]
            for i in range(N):
                if (h + shift * (ut[i + 1] - ut[i])) <= 0.0:
                    bad_row = r
                    bad_cell = i
                    bad_kind = 1
                    break
            if bad_kind:
                break
            for i in range(N):
                A = a + i * h + shift * ut[i]
                B = a + (i + 1) * h + shift * ut[i + 1]
                mlo = <long>floor((A - a) / h)
                mhi = <long>ceil((B - a) / h) - 1
                for m in range(mlo, mhi + 1):
                    lo = a + m * h
                    c = A if A > lo else lo
                    d = B if B < lo + h else lo + h
                    width = d - c
                    if width < 1e-14 * h:
                        continue
                    for q in range(o):
                        xq[q] = c + width * nv[q]
                        status = trace_one(row, drow, N, o, xq[q], a, h, shift, &nv[0], &bv[0],
                                           method, max_iter, tol, &alpha, &it)
                        if status:
                            bad_row = r
                            bad_kind = 2
                            bad_x = xq[q]
                            break
                        if it > max_used:
                            max_used = it
                        sloc = (alpha - (a + i * h)) / h
                        sloc -= N * cround((sloc - 0.5) / N)
                        vals[q] = width * wv[q] * bary_eval(&uv[r, i, 0], sloc, &nv[0], &bv[0], o)
                    if bad_kind:
                        break
                    mw = m % N
                    if mw < 0:
                        mw += N
                    for q in range(o):
                        bary_basis((xq[q] - lo) / h, &nv[0], &bv[0], o, phi)
                        for l in range(o):
                            ov[r, mw, l] += vals[q] * phi[l]
                if bad_kind:
                    break
            if bad_kind:
                break
            for i in range(N):
                for l in range(o):
                    ov[r, i, l] /= h * wv[l]
    if bad_kind == 1:
        raise StepRejected(bad_cell, bad_row)
    if bad_kind == 2:
        raise SingularJacobian(bad_x, bad_row)
    return out, max_used
