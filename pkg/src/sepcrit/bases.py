"""Traceless orthogonal operator bases {G_0 = I, G_1, ..., G_{d^2-1}}.

Each family fixes its element order:

* ``pauli``      sigma_0..sigma_3, kappa 2
* ``weyl``       W(n, m) at index n*d + m, kappa d (not Hermitian for d > 2)
* ``hw``         explicit Hermitian Heisenberg-Weyl tables for d in {2, 3, 4}, kappa d
* ``gellmann``   symmetric/antisymmetric pairs (j<k in lexicographic order),
                 then the diagonal generators, kappa 2
* ``canonical``  the Gell-Mann family divided by sqrt(2), kappa 1
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

FAMILIES = ("pauli", "weyl", "hw", "gellmann", "canonical")
MAX_DIM = 16


@dataclass(frozen=True)
class OperatorBasis:
    dim: int
    kappa: float
    elements: np.ndarray  # shape (d*d, d, d)
    label: str

    def __post_init__(self):
        els = np.asarray(self.elements, dtype=np.complex128)
        d = int(self.dim)
        if els.shape != (d * d, d, d):
            raise ValidationError(f"expected {d * d} matrices of size {d}x{d}, got {els.shape}")
        if self.kappa < 1:
            raise ValidationError(f"kappa must be >= 1, got {self.kappa}")
        els.setflags(write=False)
        object.__setattr__(self, "elements", els)

    def __len__(self) -> int:
        return self.dim * self.dim

    @property
    def traceless(self) -> np.ndarray:
        """The d^2 - 1 non-identity elements."""
        return self.elements[1:]

    @property
    def is_hermitian(self) -> bool:
        els = self.elements
        return bool(np.max(np.abs(els - els.conj().transpose(0, 2, 1))) <= 1e-12)


@dataclass
class BasisDiagnostics:
    """Largest violation of each basis condition."""

    identity_error: float
    trace_error: float
    gram_error: float
    hermiticity_error: float
    kappa_ok: bool
    failing_elements: list[int] = field(default_factory=list)

    def ok(self, tol: float = 1e-10) -> bool:
        return (
            self.kappa_ok
            and self.identity_error <= tol
            and self.trace_error <= tol
            and self.gram_error <= tol
        )


def validate_basis(b: OperatorBasis, tol: float = 1e-10) -> BasisDiagnostics:
    els = b.elements
    d = b.dim
    identity_error = float(np.max(np.abs(els[0] - np.eye(d))))
    traces = np.abs(np.einsum("kii->k", els[1:]))
    # <G_a, G_b> = Tr(G_a^H G_b) = sum_ij conj(G_a[i, j]) G_b[i, j]
    gram = np.einsum("aij,bij->ab", els[1:].conj(), els[1:])
    gram_dev = np.abs(gram - b.kappa * np.eye(d * d - 1))
    herm = np.max(np.abs(els - els.conj().transpose(0, 2, 1)), axis=(1, 2))
    bad = sorted(
        {int(i) + 1 for i in np.flatnonzero(traces > tol)}
        | {int(i) + 1 for i in np.flatnonzero(gram_dev.max(axis=1) > tol)}
    )
    return BasisDiagnostics(
        identity_error=identity_error,
        trace_error=float(traces.max(initial=0.0)),
        gram_error=float(gram_dev.max(initial=0.0)),
        hermiticity_error=float(herm.max()),
        kappa_ok=b.kappa >= 1,
        failing_elements=bad,
    )


def pauli_basis() -> OperatorBasis:
    els = np.array(
        [
            [[1, 0], [0, 1]],
            [[0, 1], [1, 0]],
            [[0, -1j], [1j, 0]],
            [[1, 0], [0, -1]],
        ],
        dtype=np.complex128,
    )
    return OperatorBasis(2, 2.0, els, "pauli")


def weyl_operator(d: int, n: int, m: int) -> np.ndarray:
    """W(n, m) = sum_k exp(2 pi i k n / d) |k><k+m mod d|."""
    out = np.zeros((d, d), dtype=np.complex128)
    for k in range(d):
        out[k, (k + m) % d] = np.exp(2j * np.pi * k * n / d)
    return out


def weyl_basis(d: int) -> OperatorBasis:
    if d < 2:
        raise ValidationError(f"Weyl basis needs d >= 2, got {d}")
    els = np.array([weyl_operator(d, n, m) for n in range(d) for m in range(d)])
    return OperatorBasis(d, float(d), els, "weyl")


def _hw3() -> np.ndarray:
    c = (1 + 1j) / 2
    cs = np.conj(c)
    w = np.exp(2j * np.pi / 3)
    ws = np.conj(w)
    return np.array(
        [
            np.eye(3),
            [[0, cs, c], [c, 0, cs], [cs, c, 0]],
            [[0, c, cs], [cs, 0, c], [c, cs, 0]],
            np.diag([c + cs, c * w + cs * ws, c * ws + cs * w]),
            [[0, -cs * w, -c * w], [-c * ws, 0, -cs], [-cs * ws, -c, 0]],
            [[0, c * ws, cs * ws], [cs * w, 0, c], [c * w, cs, 0]],
            np.diag([c + cs, c * ws + cs * w, c * w + cs * ws]),
            [[0, cs * ws, c * ws], [c * w, 0, cs], [cs * w, c, 0]],
            [[0, c * w, cs * w], [cs * ws, 0, c], [c * ws, cs, 0]],
        ],
        dtype=np.complex128,
    )


def _hw4() -> np.ndarray:
    # transcribed entry for entry, including the irregular G5/G7/G13/G15
    c = (1 + 1j) / 2
    cs = np.conj(c)
    r = 1 / np.sqrt(2)
    i = 1j
    return np.array(
        [
            np.eye(4),
            [[0, cs, 0, c], [c, 0, cs, 0], [0, c, 0, cs], [cs, 0, c, 0]],
            [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]],
            [[0, c, 0, cs], [cs, 0, c, 0], [0, cs, 0, c], [c, 0, cs, 0]],
            np.diag([1, -1, -1, 1]),
            [[0, -i, 0, 0], [i, 0, -1, 0], [0, -1, 0, i], [1, 0, -i, 0]],
            [[0, 0, -i, 0], [0, 0, 0, i], [i, 0, 0, 0], [0, -i, 0, 0]],
            r * np.array([[0, -i, 0, -1], [i, 0, -1, 0], [0, -1, 0, i], [1, 0, -i, 0]]),
            np.diag([1, -1, 1, -1]),
            [[0, -c, 0, cs], [-cs, 0, c, 0], [0, cs, 0, -c], [c, 0, -cs, 0]],
            [[0, 0, -1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, 1, 0, 0]],
            [[0, -cs, 0, c], [-c, 0, cs, 0], [0, c, 0, -cs], [cs, 0, -c, 0]],
            np.diag([1, 1, -1, -1]),
            r * np.array([[0, -1, 0, -i], [-1, 0, -i, 0], [0, i, 0, 1], [i, 0, 1, 0]]),
            [[0, 0, i, 0], [0, 0, 0, i], [-i, 0, 0, 0], [0, i, 0, 0]],
            r * np.array([[0, 1, 0, -i], [1, 0, -i, 0], [0, i, 0, -1], [i, 0, -1, 0]]),
        ],
        dtype=np.complex128,
    )


def heisenberg_weyl_basis(d: int) -> OperatorBasis:
    """Hermitian Heisenberg-Weyl tables; only d = 2, 3, 4 are available."""
    if d == 2:
        return OperatorBasis(2, 2.0, pauli_basis().elements, "hw")
    if d == 3:
        return OperatorBasis(3, 3.0, _hw3(), "hw")
    if d == 4:
        return OperatorBasis(4, 4.0, _hw4(), "hw")
    raise ValidationError(f"Heisenberg-Weyl tables exist only for d in (2, 3, 4), got {d}")


def gell_mann_basis(d: int) -> OperatorBasis:
    if d < 2:
        raise ValidationError(f"Gell-Mann basis needs d >= 2, got {d}")
    els = [np.eye(d, dtype=np.complex128)]
    for j in range(d):
        for k in range(j + 1, d):
            sym = np.zeros((d, d), dtype=np.complex128)
            sym[j, k] = sym[k, j] = 1
            anti = np.zeros((d, d), dtype=np.complex128)
            anti[j, k] = -1j
            anti[k, j] = 1j
            els += [sym, anti]
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        els.append(np.diag(diag * np.sqrt(2 / (l * (l + 1)))).astype(np.complex128))
    return OperatorBasis(d, 2.0, np.array(els), "gellmann")


def canonical_basis(d: int) -> OperatorBasis:
    gm = gell_mann_basis(d).elements.copy()
    gm[1:] /= np.sqrt(2)
    return OperatorBasis(d, 1.0, gm, "canonical")


def get_basis(family: str, d: int) -> OperatorBasis:
    if d > MAX_DIM:
        raise ValidationError(f"dimension {d} exceeds the supported maximum {MAX_DIM}")
    family = family.lower()
    if family == "pauli":
        if d != 2:
            raise ValidationError("the Pauli family is two-dimensional")
        return pauli_basis()
    if family == "weyl":
        return weyl_basis(d)
    if family in ("hw", "heisenberg-weyl"):
        return heisenberg_weyl_basis(d)
    if family in ("gellmann", "gell-mann"):
        return gell_mann_basis(d)
    if family == "canonical":
        return canonical_basis(d)
    raise ValidationError(f"unknown basis family {family!r}; choose from {', '.join(FAMILIES)}")
