"""Benchmark states, white-noise families and seeded random samplers.

Computational basis ordering is row-major: |i>|j> sits at index i * d_B + j.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Sequence

import numpy as np

from .bloch import DensityMatrix
from .errors import ValidationError


def basis_ket(indices: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    psi = np.zeros(int(np.prod(dims)), dtype=np.complex128)
    psi[np.ravel_multi_index(tuple(indices), tuple(dims))] = 1.0
    return psi


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"mixing weight p={p} outside [0, 1]")
    return p


def mix_white_noise(rho: DensityMatrix, p: float) -> DensityMatrix:
    """(1 - p) I / D + p rho."""
    p = _check_p(p)
    D = rho.dim
    return DensityMatrix((1 - p) / D * np.eye(D) + p * rho.matrix, rho.dims)


def bennett_ppt_3x3() -> DensityMatrix:
    """Complement of the five-element unextendible product basis on 3 x 3, normalized."""
    e = np.eye(3)
    s2 = np.sqrt(2)
    kets = [
        np.kron(e[0], e[0] - e[1]) / s2,
        np.kron(e[0] - e[1], e[2]) / s2,
        np.kron(e[2], e[1] - e[2]) / s2,
        np.kron(e[1] - e[2], e[0]) / s2,
        np.kron(e.sum(0), e.sum(0)) / 3,
    ]
    proj = sum(np.outer(k, k) for k in kets)
    return DensityMatrix((np.eye(9) - proj) / 4, (3, 3))


def horodecki_2x4(a: float) -> DensityMatrix:
    """Bound entangled 2 x 4 state with parameter 0 < a < 1."""
    a = float(a)
    if not 0.0 < a < 1.0:
        raise ValidationError(f"parameter a={a} must lie strictly between 0 and 1")
    s = np.sqrt(1 - a * a) / 2
    h = (1 + a) / 2
    m = np.array(
        [
            [a, 0, 0, 0, 0, a, 0, 0],
            [0, a, 0, 0, 0, 0, a, 0],
            [0, 0, a, 0, 0, 0, 0, a],
            [0, 0, 0, a, 0, 0, 0, 0],
            [0, 0, 0, 0, h, 0, 0, s],
            [a, 0, 0, 0, 0, a, 0, 0],
            [0, a, 0, 0, 0, 0, a, 0],
            [0, 0, a, 0, s, 0, 0, h],
        ]
    )
    return DensityMatrix(m / (7 * a + 1), (2, 4))


def horodecki_mixed(a: float, p: float) -> DensityMatrix:
    """p |xi><xi| + (1 - p) rho_a with |xi> = (|00> + |11>)/sqrt 2 inside 2 x 4."""
    p = _check_p(p)
    xi = (basis_ket((0, 0), (2, 4)) + basis_ket((1, 1), (2, 4))) / np.sqrt(2)
    return DensityMatrix(p * np.outer(xi, xi.conj()) + (1 - p) * horodecki_2x4(a).matrix, (2, 4))


def werner_type_332() -> DensityMatrix:
    """Pure 3 x 3 x 2 state ((|10> + |21>)|0> + (|00> + |11> + |22>)|1>) / sqrt 5."""
    dims = (3, 3, 2)
    psi = sum(basis_ket(ix, dims) for ix in [(1, 0, 0), (2, 1, 0), (0, 0, 1), (1, 1, 1), (2, 2, 1)])
    return DensityMatrix.from_ket(psi, dims)


def ghz_perturbed(eps: float) -> DensityMatrix:
    """(|000> + eps |110> + |111>) / sqrt(2 + eps^2)."""
    eps = float(eps)
    if not np.isfinite(eps):
        raise ValidationError("eps must be finite")
    dims = (2, 2, 2)
    psi = basis_ket((0, 0, 0), dims) + eps * basis_ket((1, 1, 0), dims) + basis_ket((1, 1, 1), dims)
    return DensityMatrix.from_ket(psi, dims)


def ghz_perturbed_mixed(p: float, eps: float) -> DensityMatrix:
    return mix_white_noise(ghz_perturbed(eps), p)


# Random samplers

def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_pure(d: int, rng) -> np.ndarray:
    rng = _rng(rng)
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    return psi / np.linalg.norm(psi)


def random_state(dims: Sequence[int], seed=None, rank: int | None = None) -> DensityMatrix:
    """M M^H / Tr(M M^H) with a complex Gaussian D x rank matrix M."""
    rng = _rng(seed)
    D = int(np.prod(dims))
    r = D if rank is None else rank
    m = rng.normal(size=(D, r)) + 1j * rng.normal(size=(D, r))
    rho = m @ m.conj().T
    return DensityMatrix(rho / np.trace(rho).real, tuple(dims))


def _terms(terms, rng) -> int:
    n = int(rng.integers(3, 7)) if terms is None else int(terms)
    if n < 1:
        raise ValidationError("a mixture needs at least one term")
    return n


def permute_subsystems(matrix: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: factor ``order[i]`` (0-based) of the input becomes factor i."""
    dims = tuple(dims)
    n = len(dims)
    t = np.asarray(matrix).reshape(dims + dims)
    perm = list(order) + [n + o for o in order]
    D = int(np.prod(dims))
    return t.transpose(perm).reshape(D, D)


def sample_fully_separable(dims: Sequence[int], terms: int | None = None, seed=None) -> DensityMatrix:
    """Convex mixture of pure product states; weights drawn from a flat simplex."""
    rng = _rng(seed)
    dims = tuple(int(d) for d in dims)
    k = _terms(terms, rng)
    weights = rng.dirichlet(np.ones(k))
    D = int(np.prod(dims))
    rho = np.zeros((D, D), dtype=np.complex128)
    for w in weights:
        psi = reduce(np.kron, [random_pure(d, rng) for d in dims])
        rho += w * np.outer(psi, psi.conj())
    return DensityMatrix(rho, dims)


def sample_separable(dims: Sequence[int], terms: int | None = None, seed=None) -> DensityMatrix:
    """Separable across every cut; for two parties this is the usual separable set."""
    return sample_fully_separable(dims, terms, seed)


def sample_biseparable(left: Sequence[int], dims: Sequence[int], terms: int | None = None,
                       seed=None) -> DensityMatrix:
    """Mixture of pure states that factor across ``left`` (1-based) and its complement."""
    rng = _rng(seed)
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    left = sorted(int(i) for i in left)
    right = [i for i in range(1, n + 1) if i not in left]
    if not left or not right:
        raise ValidationError("both sides of the cut must be nonempty")
    dl = int(np.prod([dims[i - 1] for i in left]))
    dr = int(np.prod([dims[i - 1] for i in right]))
    k = _terms(terms, rng)
    weights = rng.dirichlet(np.ones(k))
    D = dl * dr
    rho = np.zeros((D, D), dtype=np.complex128)
    for w in weights:
        psi = np.kron(random_pure(dl, rng), random_pure(dr, rng))
        rho += w * np.outer(psi, psi.conj())
    grouped = tuple(dims[i - 1] for i in left + right)
    # factor at grouped position j belongs to subsystem (left + right)[j]
    where = {s: j for j, s in enumerate(left + right)}
    order = [where[s] for s in range(1, n + 1)]
    return DensityMatrix(permute_subsystems(rho, grouped, order), dims)


@dataclass(frozen=True)
class StateFamily:
    """A one-parameter family p -> rho_p with fixed extra parameters."""

    tag: str
    dims: tuple[int, ...]
    builder: Callable[..., DensityMatrix] = field(repr=False, compare=False)
    fixed: dict = field(default_factory=dict)

    def __call__(self, p: float) -> DensityMatrix:
        return self.builder(_check_p(p), **self.fixed)


def _bennett_family(p):
    return mix_white_noise(bennett_ppt_3x3(), p)


def _werner_family(p):
    return mix_white_noise(werner_type_332(), p)


def _horodecki_family(p, a):
    return horodecki_mixed(a, p)


def _maxmixed_family(p, dims=(3, 3)):
    return DensityMatrix.maximally_mixed(dims)


def make_family(tag: str, a: float = 0.9, eps: float = 0.1, dims=(3, 3)) -> StateFamily:
    tag = tag.lower()
    if tag == "bennett":
        return StateFamily("bennett", (3, 3), _bennett_family)
    if tag == "horodecki":
        return StateFamily("horodecki", (2, 4), _horodecki_family, {"a": a})
    if tag == "werner332":
        return StateFamily("werner332", (3, 3, 2), _werner_family)
    if tag == "ghzpert":
        return StateFamily("ghzpert", (2, 2, 2), ghz_perturbed_mixed, {"eps": eps})
    if tag == "maxmixed":
        return StateFamily("maxmixed", tuple(dims), _maxmixed_family, {"dims": tuple(dims)})
    raise ValidationError(f"unknown state family {tag!r}; choose from {', '.join(FAMILY_TAGS)}")


FAMILY_TAGS = ("bennett", "horodecki", "werner332", "ghzpert", "maxmixed")
