"""Pure numpy fallback for the compiled Jacobi kernels.

Same signatures and rotation order as ``_kernels``; each rotation is applied
as a vectorised row/column update, so it is slower but gives matching results.
"""
import numpy as np

_EPS = np.finfo(np.float64).eps


def _schur_tangent(zeta: float) -> float:
    if zeta >= 0.0:
        return 1.0 / (zeta + np.sqrt(1.0 + zeta * zeta))
    return -1.0 / (-zeta + np.sqrt(1.0 + zeta * zeta))


def jacobi_eigh(h, want_vectors=True, tol=1e-14, max_sweeps=100):
    a = np.array(h, dtype=np.complex128, order="C", copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128) if want_vectors else None
    fro2 = float(np.vdot(a, a).real)
    if fro2 == 0.0:
        return a.diagonal().real.copy(), v, 0

    off_mask = ~np.eye(n, dtype=bool)
    sweeps = -1
    for sweep in range(max_sweeps + 1):
        off2 = float(np.sum(np.abs(a[off_mask]) ** 2))
        if off2 <= tol * tol * fro2:
            sweeps = sweep
            break
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                absb = abs(b)
                if absb == 0.0:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                t = _schur_tangent((aqq - app) / (2.0 * absb))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                e = b / absb
                ec = e.conjugate()
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * ec * col_q
                a[:, q] = s * col_p + c * ec * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * e * row_q
                a[q, :] = s * row_p + c * e * row_q
                a[p, p] = app - t * absb
                a[q, q] = aqq + t * absb
                a[p, q] = 0.0
                a[q, p] = 0.0
                if v is not None:
                    vp = v[:, p].copy()
                    vq = v[:, q]
                    v[:, p] = c * vp - s * ec * vq
                    v[:, q] = s * vp + c * ec * vq
    return a.diagonal().real.copy(), v, sweeps


def jacobi_svdvals(a, tol=0.0, max_sweeps=100):
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError("expected a matrix")
    if arr.shape[0] > arr.shape[1]:
        arr = arr.T
    w = np.array(arr, dtype=np.complex128, order="C", copy=True)
    r, length = w.shape
    if tol <= 0.0:
        tol = max(length, 1) * _EPS
    # rows below eps * ||a||_F are numerically zero
    floor2 = _EPS * _EPS * float(np.vdot(w, w).real)

    sweeps = -1
    for sweep in range(max_sweeps):
        rotated = False
        for p in range(r - 1):
            for q in range(p + 1, r):
                alpha = float(np.vdot(w[p], w[p]).real)
                beta = float(np.vdot(w[q], w[q]).real)
                if alpha <= floor2 or beta <= floor2:
                    continue
                g = np.vdot(w[p], w[q])
                absg = abs(g)
                if absg == 0.0 or absg <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                t = _schur_tangent((beta - alpha) / (2.0 * absg))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                x = w[p].copy()
                y = w[q] * (g / absg).conjugate()
                w[p] = c * x - s * y
                w[q] = s * x + c * y
        if not rotated:
            sweeps = sweep + 1
            break
    return np.sqrt(np.sum(np.abs(w) ** 2, axis=1)), sweeps
