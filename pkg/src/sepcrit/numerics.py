"""Eigenvalues, singular values and trace norms on top of the Jacobi kernels.

The compiled kernels are used when the extension is importable; setting
``SEPCRIT_PURE_PYTHON=1`` forces the numpy fallback.  ``BACKEND`` records
which one was picked.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError
from .tensor import all_unfolding_specs, as_tensor, mixed_mode_unfold


def _load_kernels():
    if os.environ.get("SEPCRIT_PURE_PYTHON", "") not in ("", "0"):
        from . import _kernels_py as mod
        return mod, "python"
    try:
        from . import _kernels as mod
        return mod, "compiled"
    except ImportError:
        from . import _kernels_py as mod
        return mod, "python"


_kernels, BACKEND = _load_kernels()

HERMITIAN_TOL = 1e-12
EIGEN_TOL = 1e-14
MAX_SWEEPS = 100


def use_backend(name: str) -> str:
    """Switch kernels at runtime ("compiled" or "python"); returns the previous name."""
    global _kernels, BACKEND
    previous = BACKEND
    if name == "python":
        from . import _kernels_py as mod
    elif name == "compiled":
        from . import _kernels as mod
    else:
        raise ValidationError(f"unknown backend {name!r}")
    _kernels, BACKEND = mod, name
    return previous


def worker_count() -> int:
    raw = os.environ.get("SEPCRIT_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None


def _square(h) -> np.ndarray:
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {h.shape}")
    return h


def hermitian_eigen(h, vectors: bool = True) -> Spectrum:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending."""
    h = _square(h)
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    asym = float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0
    if asym > HERMITIAN_TOL * scale:
        raise ValidationError(f"matrix is not Hermitian (max |h - h^H| = {asym:.3e})")
    sym = 0.5 * (h + h.conj().T)
    w, v, sweeps = _kernels.jacobi_eigh(sym, vectors, EIGEN_TOL, MAX_SWEEPS)
    if sweeps < 0:
        raise ConvergenceError(f"Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps")
    order = np.argsort(-w, kind="stable")
    return Spectrum(w[order], None if v is None else v[:, order])


def min_eigenvalue(h) -> float:
    return float(hermitian_eigen(h, vectors=False).eigenvalues[-1])


def singular_values(a) -> np.ndarray:
    """Singular values in descending order (length min(rows, cols))."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2:
        raise ValidationError(f"expected a matrix, got shape {a.shape}")
    if a.size == 0:
        return np.zeros(0)
    s, sweeps = _kernels.jacobi_svdvals(a, 0.0, MAX_SWEEPS)
    if sweeps < 0:
        raise ConvergenceError(f"Jacobi SVD did not converge in {MAX_SWEEPS} sweeps")
    return np.sort(s)[::-1]


def trace_norm_matrix(a) -> float:
    return float(np.sum(singular_values(a)))


def tensor_trace_norm(a, workers: int | None = None) -> float:
    """Largest matrix trace norm over all mixed-mode unfoldings of ``a``."""
    a = as_tensor(a)
    if a.ndim < 2:
        raise ValidationError("tensor trace norm needs order >= 2")
    specs = list(all_unfolding_specs(a.ndim))

    def one(spec):
        return trace_norm_matrix(mixed_mode_unfold(a, spec))

    workers = worker_count() if workers is None else workers
    if workers > 1 and len(specs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(one, specs))
    else:
        values = [one(s) for s in specs]
    return float(max(values))
