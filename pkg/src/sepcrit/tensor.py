"""Dense complex tensors: products, unfoldings and vectorizations.

Tensors are plain ``numpy`` arrays of dtype complex128.  Mode numbers in the
public API are 1-based, matching the usual multilinear-algebra notation; all
internal index arithmetic is 0-based.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from .errors import ValidationError


def as_tensor(a) -> np.ndarray:
    """Coerce to a complex128 array of order >= 1."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim == 0:
        raise ValidationError("a tensor needs at least one mode")
    if any(s < 1 for s in arr.shape):
        raise ValidationError(f"tensor extents must be >= 1, got {arr.shape}")
    return arr


def _check_mode(k: int, order: int) -> None:
    if not 1 <= k <= order:
        raise ValidationError(f"mode {k} out of range for an order-{order} tensor")


@dataclass(frozen=True)
class UnfoldingSpec:
    """Row modes, column modes and the pivot inside each (all 1-based).

    Rows are linearized over ``rows[n:] + rows[:n]`` and columns over
    ``cols[m:] + cols[:m]``, last mode fastest.
    """

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    n: int = 1
    m: int = 1

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(int(r) for r in self.rows))
        object.__setattr__(self, "cols", tuple(int(c) for c in self.cols))
        if not self.rows or not self.cols:
            raise ValidationError("row and column mode sets must both be nonempty")
        if list(self.rows) != sorted(set(self.rows)) or list(self.cols) != sorted(set(self.cols)):
            raise ValidationError("mode sets must be strictly increasing")
        if set(self.rows) & set(self.cols):
            raise ValidationError("row and column mode sets overlap")
        if not 1 <= self.n <= len(self.rows):
            raise ValidationError(f"row pivot n={self.n} outside [1, {len(self.rows)}]")
        if not 1 <= self.m <= len(self.cols):
            raise ValidationError(f"column pivot m={self.m} outside [1, {len(self.cols)}]")

    @property
    def order(self) -> int:
        return len(self.rows) + len(self.cols)

    def validate_for(self, order: int) -> None:
        if sorted(self.rows + self.cols) != list(range(1, order + 1)):
            raise ValidationError(
                f"modes {self.rows}|{self.cols} do not partition [1..{order}]"
            )


def all_unfolding_specs(order: int) -> Iterator[UnfoldingSpec]:
    """Every spec with nonempty row and column sets and every pivot pair."""
    modes = range(1, order + 1)
    for k in range(1, order):
        for rows in combinations(modes, k):
            cols = tuple(c for c in modes if c not in rows)
            for n in range(1, len(rows) + 1):
                for m in range(1, len(cols) + 1):
                    yield UnfoldingSpec(rows, cols, n, m)


def _axis_index(shape: Sequence[int], mode: int) -> np.ndarray:
    # 0-based index along one mode, broadcastable against the full tensor
    view = [1] * len(shape)
    view[mode - 1] = shape[mode - 1]
    return np.arange(shape[mode - 1]).reshape(view)


def _prod(shape: Sequence[int], modes: Sequence[int]) -> int:
    out = 1
    for md in modes:
        out *= shape[md - 1]
    return out


def _pivoted_index(shape: Sequence[int], modes: Sequence[int], pivot: int) -> np.ndarray:
    """Mixed-unfolding index of each entry over ``modes`` with the given pivot.

    Modes after the pivot form the slow block, weighted by the product of the
    extents up to the pivot; modes up to the pivot form the fast block.
    """
    k = len(modes)
    fast_span = _prod(shape, modes[:pivot])
    slow = 0
    for kp in range(pivot, k):
        slow = slow + _axis_index(shape, modes[kp]) * _prod(shape, modes[kp + 1:k])
    fast = 0
    for kp in range(pivot):
        fast = fast + _axis_index(shape, modes[kp]) * _prod(shape, modes[kp + 1:pivot])
    return fast_span * slow + fast


def mixed_mode_unfold(a, spec: UnfoldingSpec) -> np.ndarray:
    """Matricize ``a`` with ``spec.rows`` as row modes and ``spec.cols`` as column modes."""
    a = as_tensor(a)
    spec.validate_for(a.ndim)
    row_idx = np.broadcast_to(_pivoted_index(a.shape, spec.rows, spec.n), a.shape)
    col_idx = np.broadcast_to(_pivoted_index(a.shape, spec.cols, spec.m), a.shape)
    out = np.zeros((_prod(a.shape, spec.rows), _prod(a.shape, spec.cols)), dtype=np.complex128)
    out[row_idx, col_idx] = a
    return out


def k_mode_unfold(a, k: int) -> np.ndarray:
    """Mode-k matricization: rows follow mode k, columns run over modes k+1..N, 1..k-1."""
    a = as_tensor(a)
    order = a.ndim
    _check_mode(k, order)
    shape = a.shape
    head = _prod(shape, range(1, k))
    col = 0
    for kp in range(k + 1, order + 1):
        col = col + _axis_index(shape, kp) * _prod(shape, range(kp + 1, order + 1))
    col = head * col
    for kp in range(1, k):
        col = col + _axis_index(shape, kp) * _prod(shape, range(kp + 1, k))
    row = _axis_index(shape, k)
    ncols = _prod(shape, [md for md in range(1, order + 1) if md != k])
    out = np.zeros((shape[k - 1], ncols), dtype=np.complex128)
    out[np.broadcast_to(row, shape), np.broadcast_to(col, shape)] = a
    return out


def vec(matrix) -> np.ndarray:
    """Column-stacking vectorization."""
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2:
        raise ValidationError("vec expects a matrix")
    return m.reshape(-1, order="F")


def vec_k(a, k: int) -> np.ndarray:
    """Vectorization of the mode-k unfolding."""
    return vec(k_mode_unfold(a, k))


def outer_product(a, b) -> np.ndarray:
    a = as_tensor(a)
    b = as_tensor(b)
    return np.multiply.outer(a, b)


def tensor_product(a, b) -> np.ndarray:
    """Paired-index Kronecker product.

    Leading modes fuse pairwise (``a`` index slow, ``b`` index fast); the
    surplus modes of the longer operand are carried through unchanged.
    """
    a = as_tensor(a)
    b = as_tensor(b)
    na, nb = a.ndim, b.ndim
    shared = min(na, nb)
    outer = np.multiply.outer(a, b)
    perm = []
    for l in range(shared):
        perm += [l, na + l]
    perm += list(range(shared, na)) + list(range(na + shared, na + nb))
    fused = [a.shape[l] * b.shape[l] for l in range(shared)]
    rest = list(a.shape[shared:]) + list(b.shape[shared:])
    return outer.transpose(perm).reshape(fused + rest)


def k_mode_product(a, u, k: int) -> np.ndarray:
    """Contract mode k of ``a`` with the columns of ``u``."""
    a = as_tensor(a)
    u = np.asarray(u, dtype=np.complex128)
    _check_mode(k, a.ndim)
    if u.ndim != 2 or u.shape[1] != a.shape[k - 1]:
        raise ValidationError(
            f"matrix of shape {u.shape} cannot act on mode {k} of extent {a.shape[k - 1]}"
        )
    return np.moveaxis(np.tensordot(u, a, axes=([1], [k - 1])), 0, k - 1)


def frobenius_norm(a) -> float:
    arr = np.asarray(a, dtype=np.complex128)
    return float(np.sqrt(np.sum(arr.real**2 + arr.imag**2)))
