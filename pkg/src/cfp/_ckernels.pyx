# cython: language_level=3
"""Compiled block kernels; see ``_pykernels`` for the reference semantics.

Both kernels release the GIL for the whole block loop, so independent
solver runs on a thread pool overlap here. Dense algebra goes through the
BLAS/LAPACK that scipy exports to Cython. Row-major symmetric and
lower-triangular data is handed over as column-major upper storage, which
is the same memory.
"""

from libc.math cimport fabs
from libc.stdlib cimport free, malloc
from libc.string cimport memcpy
from scipy.linalg.cython_blas cimport ddot, dsymv, dtrsv
from scipy.linalg.cython_lapack cimport dpotrf

NAME = "cython"

cdef double EPS = 2.220446049250313e-16


def cut_blocks(const double[:, :, ::1] A, const double[:, ::1] b, const double[::1] alpha,
               const double[:, ::1] X, double[:, ::1] D, double[::1] G):
    cdef Py_ssize_t m = X.shape[0], n = X.shape[1]
    cdef Py_ssize_t i, j
    cdef double g, gsq, step
    cdef double *R
    cdef int bad = -1
    R = <double *> malloc(n * sizeof(double))
    if R == NULL:
        raise MemoryError()
    with nogil:
        for i in range(m):
            _affine(n, &A[i, 0, 0], &b[i, 0], &X[i, 0], R)
            g = -alpha[i]
            gsq = 0.0
            for j in range(n):
                g = g + X[i, j] * (R[j] + b[i, j])
                gsq = gsq + R[j] * R[j]
            G[i] = g
            if g > 0.0:
                if gsq == 0.0:
                    bad = <int> i
                    break
                # grad = 2 R, so g/|grad|^2 * grad = (g / (2 |R|^2)) R
                step = g / (2.0 * gsq)
                for j in range(n):
                    D[i, j] = -step * R[j]
            else:
                for j in range(n):
                    D[i, j] = 0.0
    free(R)
    return bad


cdef inline void _affine(Py_ssize_t n, const double *A, const double *b, const double *x, double *r) noexcept nogil:
    """r = A x + b for symmetric A."""
    cdef int nn = <int> n, one = 1
    cdef double unit = 1.0
    memcpy(r, b, n * sizeof(double))
    dsymv(b"U", &nn, &unit, <double *> A, &nn, <double *> x, &one, &unit, r, &one)


cdef struct Work:
    Py_ssize_t n
    double *L    # n x n lower Cholesky factor of I + lam A
    double *y
    double *z
    double *w


cdef int _cholesky(Work *W, const double[:, ::1] A, double lam) noexcept nogil:
    """Factor I + lam A; the factor is L^T in row-major upper storage."""
    cdef Py_ssize_t n = W.n, i, j
    cdef int nn = <int> n, info = 0
    cdef double *L = W.L
    for i in range(n):
        for j in range(i, n):
            L[i * n + j] = lam * A[i, j]
        L[i * n + i] += 1.0
    # column-major lower == row-major upper
    dpotrf(b"L", &nn, L, &nn, &info)
    return -1 if info != 0 else 0


cdef inline void _forward(Work *W, double *v) noexcept nogil:
    """Solve L v' = v in place."""
    cdef int nn = <int> W.n, one = 1
    dtrsv(b"L", b"N", b"N", &nn, W.L, &nn, v, &one)


cdef inline void _backward(Work *W, double *v) noexcept nogil:
    """Solve L^T v' = v in place."""
    cdef int nn = <int> W.n, one = 1
    dtrsv(b"L", b"T", b"N", &nn, W.L, &nn, v, &one)


cdef int _evaluate(Work *W, const double[:, ::1] A, const double[::1] b, double alpha,
                   const double[::1] x, double lam, double *g, double *dg) noexcept nogil:
    """Set W.z = (I + lam A)^{-1}(x - lam b), g = g(z), dg = d g(z(lam)) / d lam."""
    cdef Py_ssize_t n = W.n, j
    cdef int nn = <int> n, one = 1
    cdef double acc
    if _cholesky(W, A, lam) != 0:
        return -1
    for j in range(n):
        W.z[j] = x[j] - lam * b[j]
    _forward(W, W.z)
    _backward(W, W.z)
    _affine(n, &A[0, 0], &b[0], W.z, W.w)
    acc = -alpha
    for j in range(n):
        acc = acc + W.z[j] * (W.w[j] + b[j])
    g[0] = acc
    _forward(W, W.w)
    dg[0] = -2.0 * ddot(&nn, W.w, &one, W.w, &one)
    return 0


cdef int _newton_block(Work *W, const double[:, ::1] A, const double[::1] b, double alpha,
                       const double[::1] x, double[::1] d, double tol, int max_iter) noexcept nogil:
    cdef Py_ssize_t n = W.n, j
    cdef double lam, g, dg, lo, hi, trial, q
    cdef double g_hi, dg_hi
    cdef int count = 0
    cdef double *best = W.y

    _affine(n, &A[0, 0], &b[0], &x[0], W.w)
    g = -alpha
    q = 0.0
    for j in range(n):
        g = g + x[j] * (W.w[j] + b[j])
        q = q + W.w[j] * W.w[j]
    if g <= 0.0:
        for j in range(n):
            d[j] = 0.0
        return 0
    lam = 0.0
    dg = -2.0 * q
    for j in range(n):
        best[j] = x[j]
    lo = 0.0
    hi = 1.0
    if _evaluate(W, A, b, alpha, x, hi, &g_hi, &dg_hi) != 0:
        return -1
    count += 1
    while g_hi > 0.0:
        lam = hi
        g = g_hi
        dg = dg_hi
        for j in range(n):
            best[j] = W.z[j]
        lo = hi
        hi = hi * 10.0
        if _evaluate(W, A, b, alpha, x, hi, &g_hi, &dg_hi) != 0:
            return -1
        count += 1
        if count >= max_iter:
            return -1
    if -g_hi <= tol:
        for j in range(n):
            d[j] = W.z[j] - x[j]
        return 0
    while count < max_iter:
        if fabs(g) <= tol:
            break
        if g > 0.0:
            lo = lam
        else:
            hi = lam
        if dg < 0.0:
            trial = lam - g / dg
        else:
            trial = 0.5 * (lo + hi)
        if not (lo < trial < hi):
            trial = 0.5 * (lo + hi)
        if trial == lam or hi - lo <= 4.0 * EPS * hi:
            break
        lam = trial
        if _evaluate(W, A, b, alpha, x, lam, &g, &dg) != 0:
            return -1
        count += 1
        for j in range(n):
            best[j] = W.z[j]
    else:
        return -1
    for j in range(n):
        d[j] = best[j] - x[j]
    return 0


def project_blocks(const double[:, :, ::1] A, const double[:, ::1] b, const double[::1] alpha,
                   const double[:, ::1] X, double[:, ::1] D, double tol_rel, int max_iter):
    cdef Py_ssize_t m = X.shape[0], n = X.shape[1], i
    cdef Work W
    cdef int bad = -1
    W.n = n
    W.L = <double *> malloc(n * n * sizeof(double))
    W.y = <double *> malloc(n * sizeof(double))
    W.z = <double *> malloc(n * sizeof(double))
    W.w = <double *> malloc(n * sizeof(double))
    if W.L == NULL or W.y == NULL or W.z == NULL or W.w == NULL:
        free(W.L); free(W.y); free(W.z); free(W.w)
        raise MemoryError()
    with nogil:
        for i in range(m):
            if _newton_block(&W, A[i], b[i], alpha[i], X[i], D[i],
                             tol_rel * (1.0 + fabs(alpha[i])), max_iter) != 0:
                bad = <int> i
                break
    free(W.L); free(W.y); free(W.z); free(W.w)
    return bad
