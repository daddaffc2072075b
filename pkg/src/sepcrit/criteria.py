"""Extended correlation tensors and the trace-norm separability tests built on them.

Four tests are provided:

* ``thm1``  bipartite: ECT trace norm against a product of pure-state Frobenius bounds
* ``thm4``  one bipartition of an N-party state
* ``thm5``  genuine multipartite entanglement from the average over bipartitions
* ``thm6``  full separability from the tensor trace norm of T^(1..N)

Every test is one-sided: a positive margin certifies entanglement, anything
else is inconclusive.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .bloch import BlochDecomposition, DensityMatrix, decompose, m_bound
from .errors import ValidationError
from .numerics import tensor_trace_norm, trace_norm_matrix
from .tensor import UnfoldingSpec, mixed_mode_unfold, vec_k

DECISION_TOL = 1e-9

ENTANGLED = "ENTANGLED"
GENUINE = "GENUINE"
INCONCLUSIVE = "INCONCLUSIVE"


def _real_vector(x, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64)).ravel()
    if arr.size < 1:
        raise ValidationError(f"{name} must have at least one entry")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class CriterionParams:
    """Free vectors u, v (identity blocks) and alpha, beta (correlation blocks)."""

    u: np.ndarray
    v: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        for name in ("u", "v", "alpha", "beta"):
            object.__setattr__(self, name, _real_vector(getattr(self, name), name))

    @classmethod
    def from_x(cls, x: float, alpha, beta, p1: int, p2: int | None = None) -> "CriterionParams":
        """u = (x, ..., x) of length p1 and v = (sqrt x, ..., sqrt x) of length p2."""
        p2 = p1 if p2 is None else p2
        return cls(np.full(p1, x), np.full(p2, np.sqrt(x)), alpha, beta)

    def norms_sq(self) -> tuple[float, float, float, float]:
        return (
            float(self.u @ self.u),
            float(self.v @ self.v),
            float(self.alpha @ self.alpha),
            float(self.beta @ self.beta),
        )

    def as_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("u", "v", "alpha", "beta")}


@dataclass(frozen=True)
class Bipartition:
    """Split of 1..N into ``left | right`` with ``1`` always on the left."""

    left: tuple[int, ...]
    right: tuple[int, ...]
    n: int = 1
    m: int = 1

    def __post_init__(self):
        left = tuple(int(i) for i in self.left)
        right = tuple(int(i) for i in self.right)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        if not left or not right:
            raise ValidationError("both sides of a bipartition must be nonempty")
        if list(left) != sorted(set(left)) or list(right) != sorted(set(right)):
            raise ValidationError("bipartition sides must be strictly increasing")
        if set(left) & set(right):
            raise ValidationError("bipartition sides overlap")
        if sorted(left + right) != list(range(1, len(left) + len(right) + 1)):
            raise ValidationError(f"{left}|{right} is not a split of 1..{len(left) + len(right)}")
        if left[0] > right[0]:
            raise ValidationError("canonical bipartitions keep the smallest label on the left")
        if not 1 <= self.n <= len(left) or not 1 <= self.m <= len(right):
            raise ValidationError(f"pivots (n={self.n}, m={self.m}) out of range for {self.label}")

    @property
    def order(self) -> int:
        return len(self.left) + len(self.right)

    @property
    def label(self) -> str:
        return "".join(map(str, self.left)) + "|" + "".join(map(str, self.right))

    @property
    def spec(self) -> UnfoldingSpec:
        return UnfoldingSpec(self.left, self.right, self.n, self.m)

    def with_pivots(self, n: int, m: int) -> "Bipartition":
        return Bipartition(self.left, self.right, n, m)

    def pivot_variants(self) -> list["Bipartition"]:
        return [
            self.with_pivots(n, m)
            for n in range(1, len(self.left) + 1)
            for m in range(1, len(self.right) + 1)
        ]

    @classmethod
    def canonical(cls, n_parties: int) -> list["Bipartition"]:
        """All 2^(N-1) - 1 bipartitions, by left size then lexicographically."""
        if n_parties < 2:
            raise ValidationError("bipartitions need at least two parties")
        out = []
        labels = range(1, n_parties + 1)
        for k in range(1, n_parties):
            for left in combinations(labels, k):
                if 1 not in left:
                    continue
                right = tuple(i for i in labels if i not in left)
                out.append(cls(left, right))
        return out

    @classmethod
    def parse(cls, text: str, n: int = 1, m: int = 1) -> "Bipartition":
        try:
            lhs, rhs = text.split("|")
            return cls(tuple(int(c) for c in lhs), tuple(int(c) for c in rhs), n, m)
        except ValueError as exc:
            raise ValidationError(f"cannot parse bipartition {text!r}: {exc}") from None


@dataclass
class CriterionReport:
    criterion: str
    trace_norm: float
    bound: float
    margin: float
    verdict: str
    tolerance: float = DECISION_TOL
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "trace_norm": self.trace_norm,
            "bound": self.bound,
            "margin": self.margin,
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "details": self.details,
        }


def _report(criterion, trace_norm, bound, tol, positive=ENTANGLED, **details) -> CriterionReport:
    margin = float(trace_norm - bound)
    verdict = positive if margin > tol else INCONCLUSIVE
    return CriterionReport(criterion, float(trace_norm), float(bound), margin, verdict, tol, details)


def as_decomposition(state, bases=None) -> BlochDecomposition:
    if isinstance(state, BlochDecomposition):
        return state
    if not isinstance(state, DensityMatrix):
        raise ValidationError("expected a DensityMatrix or BlochDecomposition")
    if bases is None:
        raise ValidationError("bases are required to decompose a density matrix")
    return decompose(state, bases)


def ect_from_blocks(params: CriterionParams, left_vec, right_vec, cross) -> np.ndarray:
    """[[u v^T, u (beta x r)^T], [(alpha x l) v^T, alpha beta^T x cross]]."""
    u, v, a, b = params.u, params.v, params.alpha, params.beta
    left_vec = np.asarray(left_vec).ravel()
    right_vec = np.asarray(right_vec).ravel()
    cross = np.asarray(cross)
    if cross.shape != (left_vec.size, right_vec.size):
        raise ValidationError(
            f"cross block {cross.shape} does not match vectors {left_vec.size}x{right_vec.size}"
        )
    top = np.hstack([np.outer(u, v), np.outer(u, np.kron(b, right_vec))])
    bottom = np.hstack([np.outer(np.kron(a, left_vec), v), np.kron(np.outer(a, b), cross)])
    return np.vstack([top, bottom]).astype(np.complex128)


def ect_bipartite(dec: BlochDecomposition, params: CriterionParams) -> np.ndarray:
    if len(dec.dims) != 2:
        raise ValidationError("the bipartite ECT needs a two-party decomposition")
    return ect_from_blocks(params, dec.tensor((1,)), dec.tensor((2,)), dec.tensor((1, 2)))


def ect_multipartite(dec: BlochDecomposition, part: Bipartition, params: CriterionParams) -> np.ndarray:
    if part.order != len(dec.dims):
        raise ValidationError(f"bipartition {part.label} does not fit {len(dec.dims)} parties")
    left = vec_k(dec.tensor(part.left), part.n)
    right = vec_k(dec.tensor(part.right), part.m)
    cross = mixed_mode_unfold(dec.full, part.spec)
    return ect_from_blocks(params, left, right, cross)


def theorem1_bound(params: CriterionParams, dA: int, dB: int, kA: float, kB: float) -> float:
    uu, vv, aa, bb = params.norms_sq()
    return float(np.sqrt((uu + aa * (dA * dA - dA) / kA) * (vv + bb * (dB * dB - dB) / kB)))


def theorem4_bound(params: CriterionParams, part: Bipartition, dims: Sequence[int],
                   kappas: Sequence[float]) -> float:
    uu, vv, aa, bb = params.norms_sq()
    m_left = m_bound([dims[i - 1] for i in part.left], [kappas[i - 1] for i in part.left]).value
    m_right = m_bound([dims[i - 1] for i in part.right], [kappas[i - 1] for i in part.right]).value
    return float(np.sqrt(uu + aa * m_left) * np.sqrt(vv + bb * m_right))


def evaluate_bipartite(state, bases, params: CriterionParams, tol: float = DECISION_TOL) -> CriterionReport:
    dec = as_decomposition(state, bases)
    if len(dec.dims) != 2:
        raise ValidationError("the bipartite test needs a two-party state")
    norm = trace_norm_matrix(ect_bipartite(dec, params))
    (dA, dB), (kA, kB) = dec.dims, dec.kappas
    return _report("thm1", norm, theorem1_bound(params, dA, dB, kA, kB), tol)


def evaluate_bipartition(state, bases, part: Bipartition, params: CriterionParams,
                         tol: float = DECISION_TOL) -> CriterionReport:
    dec = as_decomposition(state, bases)
    norm = trace_norm_matrix(ect_multipartite(dec, part, params))
    bound = theorem4_bound(params, part, dec.dims, dec.kappas)
    return _report("thm4", norm, bound, tol, bipartition=part.label, pivots=[part.n, part.m])


def _pivoted(part: Bipartition, pivots) -> list[Bipartition]:
    if pivots == "all":
        return part.pivot_variants()
    n, m = pivots
    # a pivot larger than a side collapses to that side's size
    return [part.with_pivots(min(int(n), len(part.left)), min(int(m), len(part.right)))]


def best_bipartition_report(dec: BlochDecomposition, part: Bipartition, params: CriterionParams,
                            pivots=(1, 1), tol: float = DECISION_TOL) -> CriterionReport:
    """Single-bipartition report maximized over the requested pivot choices."""
    reports = [evaluate_bipartition(dec, None, p, params, tol) for p in _pivoted(part, pivots)]
    return max(reports, key=lambda r: (r.trace_norm, -r.details["pivots"][0], -r.details["pivots"][1]))


@dataclass
class GMEResult:
    score: float
    threshold: float
    margin: float
    verdict: str
    reports: list[CriterionReport]
    tolerance: float = DECISION_TOL

    def as_dict(self) -> dict:
        return {
            "criterion": "thm5",
            "score": self.score,
            "threshold": self.threshold,
            "margin": self.margin,
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "bipartitions": [r.as_dict() for r in self.reports],
        }


def gme_threshold(bounds_by_part: Iterable[tuple[Bipartition, float]]) -> float:
    """Sum over left-side sizes k of the largest bound among bipartitions with |left| = k."""
    best: dict[int, float] = {}
    for part, bound in bounds_by_part:
        k = len(part.left)
        best[k] = max(best.get(k, -np.inf), bound)
    return float(sum(best.values()))


def gme_scores(state, bases, params: CriterionParams, pivots=(1, 1), tol: float = DECISION_TOL,
               workers: int = 1) -> GMEResult:
    """Average ECT trace norm over all bipartitions against the summed per-size bounds."""
    dec = as_decomposition(state, bases)
    n = len(dec.dims)
    if n < 2:
        raise ValidationError("genuine-entanglement scores need at least two parties")
    parts = Bipartition.canonical(n)

    def one(part):
        return best_bipartition_report(dec, part, params, pivots, tol)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(one, parts))
    else:
        reports = [one(p) for p in parts]
    score = float(np.mean([r.trace_norm for r in reports]))
    threshold = gme_threshold(zip(parts, (r.bound for r in reports)))
    margin = score - threshold
    verdict = GENUINE if margin > tol else INCONCLUSIVE
    return GMEResult(score, threshold, margin, verdict, reports, tol)


def theorem6_bound(dims: Sequence[int], kappas: Sequence[float]) -> float:
    return float(np.prod([np.sqrt((d * d - d) / k) for d, k in zip(dims, kappas)]))


def theorem6_check(state, bases=None, tol: float = DECISION_TOL) -> CriterionReport:
    dec = as_decomposition(state, bases)
    if len(dec.dims) < 2:
        raise ValidationError("full-separability test needs at least two parties")
    norm = tensor_trace_norm(dec.full)
    return _report("thm6", norm, theorem6_bound(dec.dims, dec.kappas), tol)


# Closed forms of earlier criteria that arise from particular parameter choices.

def de_vicente_bound(dA: int, dB: int) -> float:
    return float(np.sqrt(dA * dB * (dA - 1) * (dB - 1) / 4))


def shen_bound(l: int, x: float, y: float, dA: int, dB: int) -> float:
    return float(0.5 * np.sqrt((2 * l * x * x + dA * dA - dA) * (2 * l * y * y + dB * dB - dB)))


def chang_bound(l: int, x: float, y: float, dA: int, dB: int) -> float:
    return float(np.sqrt((l * x * x + dA - 1) * (l * y * y + dB - 1)))


def zhu_bound(u, v, dA: int, dB: int) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(np.sqrt((u @ u + (dA * dA - dA) / 2) * (v @ v + (dB * dB - dB) / 2)))


def huang_hat_bound(n: int, x: float, y: float, dA: int, dB: int, kA: float, kB: float) -> float:
    return float(np.sqrt((n * x * x + (dA * dA - dA) / kA) * (n * y * y + (dB * dB - dB) / kB)))


@dataclass(frozen=True)
class ReductionCase:
    name: str
    inputs: dict
    ours: float
    closed_form: float

    @property
    def relative_error(self) -> float:
        scale = max(abs(self.closed_form), np.finfo(float).tiny)
        return abs(self.ours - self.closed_form) / scale


def reduction_identities(samples: int = 50, seed: int = 0) -> list[ReductionCase]:
    """Evaluate each parameter substitution next to the closed form it should reproduce."""
    rng = np.random.default_rng(seed)
    one = np.ones(1)
    zero = np.zeros(1)
    cases: list[ReductionCase] = []
    for _ in range(samples):
        dA, dB = (int(d) for d in rng.integers(2, 9, size=2))
        l = int(rng.integers(1, 7))
        x, y = (float(t) for t in rng.uniform(0.0, 5.0, size=2))
        kA, kB = (float(t) for t in rng.uniform(1.0, 10.0, size=2))
        inputs = dict(dA=dA, dB=dB, l=l, x=x, y=y, kA=kA, kB=kB)

        p = CriterionParams(zero, zero, one, one)
        cases.append(ReductionCase("de_vicente", inputs, theorem1_bound(p, dA, dB, 2, 2),
                                   de_vicente_bound(dA, dB)))

        p = CriterionParams(np.full(l, x), np.full(l, y), one, one)
        cases.append(ReductionCase("shen", inputs, theorem1_bound(p, dA, dB, 2, 2),
                                   shen_bound(l, x, y, dA, dB)))
        cases.append(ReductionCase("chang", inputs, theorem1_bound(p, dA, dB, dA, dB),
                                   chang_bound(l, x, y, dA, dB)))
        cases.append(ReductionCase("huang_hat", inputs, theorem1_bound(p, dA, dB, kA, kB),
                                   huang_hat_bound(l, x, y, dA, dB, kA, kB)))

        u = rng.normal(size=int(rng.integers(1, 6)))
        v = rng.normal(size=int(rng.integers(1, 6)))
        p = CriterionParams(u, v, one, one)
        cases.append(ReductionCase("zhu", dict(inputs, u=u.tolist(), v=v.tolist()),
                                   theorem1_bound(p, dA, dB, 2, 2), zhu_bound(u, v, dA, dB)))
    return cases
