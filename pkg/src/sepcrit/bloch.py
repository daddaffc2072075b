"""Generalized Bloch decomposition of multipartite density matrices.

A state on d_1 x ... x d_N is written as

    rho = (1/D) (I + sum_S sum_idx t^(S)_idx  G_idx(S))

where S runs over nonempty subsets of subsystems, G_idx(S) places the
traceless element G_{idx_s} of basis s on each s in S and the identity
elsewhere, and t^(S)_idx = prod_{s in S} (d_s / kappa_s) * Tr(G_idx(S)^H rho).
Subsets are 1-based, sorted tuples such as ``(1, 3)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .bases import OperatorBasis
from .errors import ValidationError
from .numerics import hermitian_eigen

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = -1e-9


def _dims_tuple(dims: Iterable[int]) -> tuple[int, ...]:
    out = tuple(int(d) for d in dims)
    if not out or any(d < 1 for d in out):
        raise ValidationError(f"invalid subsystem dimensions {out}")
    return out


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    dims: tuple[int, ...]
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        dims = _dims_tuple(self.dims)
        m = np.array(self.matrix, dtype=np.complex128)
        D = int(np.prod(dims))
        if m.shape != (D, D):
            raise ValidationError(f"matrix shape {m.shape} does not match dims {dims} (D={D})")
        m.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", m)
        if self.validate:
            self.check()

    def check(self) -> None:
        m = self.matrix
        asym = float(np.max(np.abs(m - m.conj().T)))
        if asym > HERMITIAN_TOL:
            raise ValidationError(f"density matrix is not Hermitian (deviation {asym:.3e})")
        tr = complex(np.trace(m))
        if abs(tr - 1) > TRACE_TOL:
            raise ValidationError(f"density matrix has trace {tr.real:.12g}, expected 1")
        low = float(hermitian_eigen(0.5 * (m + m.conj().T), vectors=False).eigenvalues[-1])
        if low < PSD_TOL:
            raise ValidationError(f"density matrix has negative eigenvalue {low:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @classmethod
    def from_ket(cls, psi, dims) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=np.complex128).ravel()
        nrm = np.linalg.norm(psi)
        if nrm == 0:
            raise ValidationError("zero vector is not a state")
        psi = psi / nrm
        return cls(np.outer(psi, psi.conj()), dims)

    @classmethod
    def maximally_mixed(cls, dims) -> "DensityMatrix":
        dims = _dims_tuple(dims)
        D = int(np.prod(dims))
        return cls(np.eye(D) / D, dims)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))


def _check_subset(subset: Iterable[int], n: int) -> tuple[int, ...]:
    s = tuple(sorted({int(i) for i in subset}))
    if not s:
        raise ValidationError("subset must be nonempty")
    if s[0] < 1 or s[-1] > n:
        raise ValidationError(f"subset {s} is not inside 1..{n}")
    return s


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the subsystems in ``keep`` (1-based)."""
    dims = rho.dims
    n = len(dims)
    keep = _check_subset(keep, n)
    t = rho.matrix.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * n > len(letters):
        raise ValidationError("too many subsystems")
    rows = list(letters[:n])
    cols = list(letters[n:2 * n])
    for s in range(1, n + 1):
        if s not in keep:
            cols[s - 1] = rows[s - 1]
    out_rows = "".join(rows[s - 1] for s in keep)
    out_cols = "".join(cols[s - 1] for s in keep)
    red = np.einsum("".join(rows) + "".join(cols) + "->" + out_rows + out_cols, t)
    kd = tuple(dims[s - 1] for s in keep)
    Dk = int(np.prod(kd))
    return DensityMatrix(red.reshape(Dk, Dk), kd, validate=False)


def all_subsets(n: int) -> list[tuple[int, ...]]:
    """Nonempty subsets of 1..n ordered by size, then lexicographically."""
    return [c for k in range(1, n + 1) for c in combinations(range(1, n + 1), k)]


def subset_mask(subset: Sequence[int]) -> int:
    return sum(1 << (s - 1) for s in subset)


@dataclass(frozen=True)
class BlochDecomposition:
    dims: tuple[int, ...]
    bases: tuple[OperatorBasis, ...]
    tensors: Mapping[tuple[int, ...], np.ndarray]

    def tensor(self, subset: Iterable[int]) -> np.ndarray:
        return self.tensors[_check_subset(subset, len(self.dims))]

    @property
    def kappas(self) -> tuple[float, ...]:
        return tuple(b.kappa for b in self.bases)

    @property
    def full(self) -> np.ndarray:
        """Correlation tensor of the whole system."""
        return self.tensors[tuple(range(1, len(self.dims) + 1))]


def _check_bases(dims, bases) -> tuple[OperatorBasis, ...]:
    if isinstance(bases, OperatorBasis):
        bases = [bases] * len(dims)
    bases = tuple(bases)
    if len(bases) != len(dims):
        raise ValidationError(f"{len(bases)} bases given for {len(dims)} subsystems")
    for s, (b, d) in enumerate(zip(bases, dims), start=1):
        if b.dim != d:
            raise ValidationError(f"basis for subsystem {s} has dimension {b.dim}, expected {d}")
    return bases


def coefficient_tensor(rho: DensityMatrix, bases) -> np.ndarray:
    """Tr((G_i1 x ... x G_iN)^H rho) for every index tuple, identity included."""
    dims = rho.dims
    bases = _check_bases(dims, bases)
    n = len(dims)
    t = rho.matrix.reshape(dims + dims)
    # contract subsystem by subsystem; the new basis index is appended at the end
    for s, b in enumerate(bases):
        # current layout: (remaining row axes, remaining col axes, basis axes so far)
        rem = n - s
        t = np.tensordot(b.elements.conj(), t, axes=([1, 2], [0, rem]))
        t = np.moveaxis(t, 0, -1)
    return t


def decompose(rho: DensityMatrix, bases) -> BlochDecomposition:
    bases = _check_bases(rho.dims, bases)
    coeff = coefficient_tensor(rho, bases)
    n = len(rho.dims)
    scale = [b.dim / b.kappa for b in bases]
    tensors = {}
    for subset in all_subsets(n):
        idx = tuple(slice(1, None) if (s + 1) in subset else 0 for s in range(n))
        factor = reduce(lambda acc, s: acc * scale[s - 1], subset, 1.0)
        block = factor * coeff[idx]
        block.setflags(write=False)
        tensors[subset] = block
    return BlochDecomposition(rho.dims, bases, tensors)


def reconstruct(dec: BlochDecomposition, validate: bool = True) -> DensityMatrix:
    dims = dec.dims
    n = len(dims)
    full = np.zeros(tuple(d * d for d in dims), dtype=np.complex128)
    full[(0,) * n] = 1.0
    for subset, block in dec.tensors.items():
        idx = tuple(slice(1, None) if (s + 1) in subset else 0 for s in range(n))
        full[idx] = block
    # sum_i full[i] G_i1 x ... x G_iN, one subsystem at a time
    op = full
    for b in dec.bases:
        op = np.tensordot(op, b.elements, axes=([0], [0]))
    # axes now: (r1, c1, r2, c2, ..., rN, cN)
    perm = [2 * s for s in range(n)] + [2 * s + 1 for s in range(n)]
    D = int(np.prod(dims))
    mat = op.transpose(perm).reshape(D, D) / D
    return DensityMatrix(mat, dims, validate=validate)


def purity_from_tensors(dec: BlochDecomposition) -> float:
    """Right-hand side of D Tr(rho^2) = 1 + sum_S prod(kappa_s/d_s) ||T^(S)||_F^2."""
    total = 1.0
    for subset, block in dec.tensors.items():
        w = 1.0
        for s in subset:
            b = dec.bases[s - 1]
            w *= b.kappa / b.dim
        total += w * float(np.sum(np.abs(block) ** 2))
    return total


@dataclass(frozen=True)
class BoundLadder:
    """Upper bound on ||T^(1..N)||_F^2 for any state, with the branch used."""

    dims: tuple[int, ...]
    kappas: tuple[float, ...]
    value: float
    case: int


def m_bound(dims: Sequence[int], kappas: Sequence[float]) -> BoundLadder:
    dims = _dims_tuple(dims)
    kappas = tuple(float(k) for k in kappas)
    if len(kappas) != len(dims):
        raise ValidationError("one kappa per subsystem is required")
    if any(d < 2 for d in dims) or any(k < 1 for k in kappas):
        raise ValidationError("extents must be >= 2 and kappas >= 1")
    n = len(dims)
    if n == 1:
        d, k = dims[0], kappas[0]
        return BoundLadder(dims, kappas, (d * d - d) / k, 1)
    prod_d = float(np.prod(dims))
    prod_k = float(np.prod(kappas))
    inv_sq = sum(1.0 / (d * d) for d in dims)
    dmax = max(dims)
    if n == 2 or prod_d / dmax**2 < 1:
        val = prod_d / prod_k * (prod_d + 1 / (n - 1) - prod_d / (n - 1) * inv_sq)
        return BoundLadder(dims, kappas, val, 2)
    val = prod_d / prod_k * (prod_d + 2 / (n - 2) - prod_d / (n - 2) * inv_sq)
    return BoundLadder(dims, kappas, val, 3)


def generalized_pauli_bound(dims: Sequence[int]) -> float:
    dims = _dims_tuple(dims)
    n = len(dims)
    if n == 1:
        return dims[0] - 1.0
    prod_d = float(np.prod(dims))
    inv_sq = sum(1.0 / (d * d) for d in dims)
    return (prod_d * (n - 1 - inv_sq) + 1) / (n - 1)


def weyl_bound(dims: Sequence[int]) -> float | None:
    """Frobenius bound for Weyl-operator tensors; None outside its stated range."""
    dims = _dims_tuple(dims)
    n = len(dims)
    if n == 1:
        return dims[0] - 1.0
    prod_d = float(np.prod(dims))
    dmax = max(dims)
    if n == 2:
        return prod_d * (1 - 1 / dmax**2)
    if prod_d / dmax**2 < 1:
        return None
    inv_sq = sum(1.0 / (d * d) for d in dims)
    return (
        prod_d
        - prod_d / (n - 1) * inv_sq
        + 1 / (n - 1)
        + (n / (n - 1) - prod_d / (n - 1) * inv_sq) / (n - 2)
    )


@dataclass(frozen=True)
class BoundComparison:
    dims: tuple[int, ...]
    ours: float
    generalized_pauli: float
    weyl: float | None


def compare_bounds(dims: Sequence[int]) -> BoundComparison:
    """Our bound at kappa_i = d_i next to the two published alternatives."""
    dims = _dims_tuple(dims)
    ours = m_bound(dims, dims).value
    return BoundComparison(dims, ours, generalized_pauli_bound(dims), weyl_bound(dims))
