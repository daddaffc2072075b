# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Jacobi kernels.

Both routines take a private copy of their input, release the GIL for the
rotation sweeps and return plain numpy arrays.  The pure-Python twin lives in
``_kernels_py`` and follows the same rotation sequence.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

ctypedef double complex cplx


cdef inline double _abs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline cplx _conj(cplx z) noexcept nogil:
    return z.real - 1j * z.imag


cdef inline double _schur_tangent(double zeta) noexcept nogil:
    # smaller root of t^2 + 2 zeta t - 1 = 0
    if zeta >= 0.0:
        return 1.0 / (zeta + sqrt(1.0 + zeta * zeta))
    return -1.0 / (-zeta + sqrt(1.0 + zeta * zeta))


cdef int _eigh_sweeps(cplx[:, ::1] a, cplx[:, ::1] v, bint want_vectors,
                      double tol, int max_sweeps) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, k
    cdef double fro2 = 0.0, off2, absb, theta, t, c, s, app, aqq
    cdef cplx b, e, ec, x, y
    cdef int sweep

    for p in range(n):
        for q in range(n):
            fro2 += _abs2(a[p, q])
    if fro2 == 0.0:
        return 0

    for sweep in range(max_sweeps + 1):
        off2 = 0.0
        for p in range(n):
            for q in range(n):
                if p != q:
                    off2 += _abs2(a[p, q])
        if off2 <= tol * tol * fro2:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                absb = sqrt(_abs2(b))
                if absb == 0.0:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * absb)
                t = _schur_tangent(theta)
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                e = b / absb
                ec = _conj(e)
                # columns: A <- A V with V = [[c, s], [-s ec, c ec]]
                for k in range(n):
                    x = a[k, p]
                    y = a[k, q]
                    a[k, p] = c * x - s * ec * y
                    a[k, q] = s * x + c * ec * y
                # rows: A <- V^H A
                for k in range(n):
                    x = a[p, k]
                    y = a[q, k]
                    a[p, k] = c * x - s * e * y
                    a[q, k] = s * x + c * e * y
                a[p, p] = app - t * absb
                a[q, q] = aqq + t * absb
                a[p, q] = 0.0
                a[q, p] = 0.0
                if want_vectors:
                    for k in range(n):
                        x = v[k, p]
                        y = v[k, q]
                        v[k, p] = c * x - s * ec * y
                        v[k, q] = s * x + c * ec * y
    return -1


def jacobi_eigh(h, bint want_vectors=True, double tol=1e-14, int max_sweeps=100):
    """Cyclic Jacobi on a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors or None, sweeps)`` with eigenvalues in
    the order they appear on the final diagonal.  ``sweeps`` is -1 when the
    off-diagonal mass did not drop below ``tol * ||h||_F`` within the cap.
    """
    cdef cplx[:, ::1] a = np.array(h, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t n = a.shape[0]
    vecs = np.eye(n, dtype=np.complex128) if want_vectors else np.zeros((1, 1), np.complex128)
    cdef cplx[:, ::1] v = vecs
    cdef int sweeps
    with nogil:
        sweeps = _eigh_sweeps(a, v, want_vectors, tol, max_sweeps)
    w = np.array([a[i, i].real for i in range(n)], dtype=np.float64)
    return w, (vecs if want_vectors else None), sweeps


cdef int _svd_sweeps(cplx[:, ::1] w, double tol, double floor2, int max_sweeps) noexcept nogil:
    # rows of w are orthogonalised in place; rows with squared norm below
    # floor2 are numerically zero and never rotated
    cdef Py_ssize_t r = w.shape[0]
    cdef Py_ssize_t L = w.shape[1]
    cdef Py_ssize_t p, q, k
    cdef double alpha, beta, absg, zeta, t, c, s
    cdef cplx g, ec, x, y
    cdef int sweep
    cdef bint rotated

    for sweep in range(max_sweeps):
        rotated = False
        for p in range(r - 1):
            for q in range(p + 1, r):
                alpha = 0.0
                beta = 0.0
                g = 0.0
                for k in range(L):
                    alpha += _abs2(w[p, k])
                    beta += _abs2(w[q, k])
                    g += _conj(w[p, k]) * w[q, k]
                if alpha <= floor2 or beta <= floor2:
                    continue
                absg = sqrt(_abs2(g))
                if absg == 0.0 or absg <= tol * sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * absg)
                t = _schur_tangent(zeta)
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                ec = _conj(g / absg)
                for k in range(L):
                    x = w[p, k]
                    y = w[q, k] * ec
                    w[p, k] = c * x - s * y
                    w[q, k] = s * x + c * y
        if not rotated:
            return sweep + 1
    return -1


def jacobi_svdvals(a, double tol=0.0, int max_sweeps=100):
    """One-sided Jacobi singular values.

    Works on whichever of ``a`` or ``a.T`` has fewer rows.  Returns
    ``(values, sweeps)`` with values unsorted; ``sweeps`` is -1 on failure.
    A non-positive ``tol`` means row length times machine epsilon.  Rows
    whose norm drops below eps * ||a||_F are left alone: their pairwise
    angles are pure rounding noise and would otherwise never settle.
    """
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError("expected a matrix")
    if arr.shape[0] > arr.shape[1]:
        arr = arr.T
    cdef cplx[:, ::1] w = np.array(arr, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t r = w.shape[0]
    cdef Py_ssize_t L = w.shape[1]
    cdef int sweeps
    cdef double eps = np.finfo(np.float64).eps
    cdef double floor2 = 0.0
    cdef Py_ssize_t i, k
    for i in range(r):
        for k in range(L):
            floor2 += _abs2(w[i, k])
    floor2 *= eps * eps
    if tol <= 0.0:
        tol = max(L, 1) * eps
    with nogil:
        sweeps = _svd_sweeps(w, tol, floor2, max_sweeps)
    out = np.empty(r, dtype=np.float64)
    cdef double[::1] o = out
    cdef double acc
    for i in range(r):
        acc = 0.0
        for k in range(L):
            acc += _abs2(w[i, k])
        o[i] = sqrt(acc)
    return out, sweeps
