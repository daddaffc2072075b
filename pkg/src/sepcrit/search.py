"""Threshold scans over the noise weight p and parameter optimization.

A :class:`CriterionConfig` fixes which test to run, the basis family per
subsystem and how (u, v, alpha, beta) depend on the scalar x.  Margins are
maximized over x on a log grid followed by golden-section refinement.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .bases import OperatorBasis, get_basis
from .bloch import BlochDecomposition, DensityMatrix, decompose
from .criteria import (
    DECISION_TOL,
    Bipartition,
    CriterionParams,
    best_bipartition_report,
    ect_bipartite,
    gme_threshold,
    theorem1_bound,
    theorem4_bound,
    theorem6_check,
    ect_multipartite,
)
from .errors import ValidationError
from .numerics import trace_norm_matrix, worker_count
from .states import StateFamily

CRITERIA = ("thm1", "thm4", "thm5", "thm6")
STRUCTURES = ("x-sqrt", "fixed")

X_MIN, X_MAX, X_POINTS = 1e-3, 10.0, 64


def default_x_grid() -> np.ndarray:
    return np.logspace(np.log10(X_MIN), np.log10(X_MAX), X_POINTS)


@dataclass(frozen=True)
class CriterionConfig:
    """Which test to run and how its parameters depend on x.

    With ``structure="x-sqrt"`` the identity blocks are u = (x, ..., x) of
    length ``p1`` and v = (sqrt x, ..., sqrt x) of length ``p2``.  With
    ``structure="fixed"`` u and v are taken verbatim and x plays no role.
    """

    criterion: str
    bases: tuple[str, ...]
    alpha: tuple[float, ...] = (1.0,)
    beta: tuple[float, ...] = (1.0,)
    p1: int = 1
    p2: int = 1
    structure: str = "x-sqrt"
    u: tuple[float, ...] | None = None
    v: tuple[float, ...] | None = None
    bipartition: str | None = None
    pivots: tuple[int, int] | str = (1, 1)
    tol: float = DECISION_TOL

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ValidationError(f"unknown criterion {self.criterion!r}; choose from {CRITERIA}")
        if self.structure not in STRUCTURES:
            raise ValidationError(f"unknown parameter structure {self.structure!r}")
        object.__setattr__(self, "bases", tuple(self.bases))
        object.__setattr__(self, "alpha", tuple(float(a) for a in np.atleast_1d(self.alpha)))
        object.__setattr__(self, "beta", tuple(float(b) for b in np.atleast_1d(self.beta)))
        if self.structure == "fixed":
            if self.u is None or self.v is None:
                raise ValidationError("fixed structure needs explicit u and v")
            object.__setattr__(self, "u", tuple(float(a) for a in np.atleast_1d(self.u)))
            object.__setattr__(self, "v", tuple(float(a) for a in np.atleast_1d(self.v)))
        if self.pivots != "all":
            n, m = self.pivots
            object.__setattr__(self, "pivots", (int(n), int(m)))
        if self.criterion == "thm4" and self.bipartition is None:
            raise ValidationError("thm4 needs a bipartition such as '1|23'")

    @property
    def uses_x(self) -> bool:
        return self.criterion != "thm6" and self.structure == "x-sqrt"

    def params(self, x: float = 1.0) -> CriterionParams:
        if self.structure == "fixed":
            return CriterionParams(self.u, self.v, self.alpha, self.beta)
        return CriterionParams.from_x(x, self.alpha, self.beta, self.p1, self.p2)

    def bases_for(self, dims: Sequence[int]) -> tuple[OperatorBasis, ...]:
        names = self.bases if len(self.bases) > 1 else self.bases * len(dims)
        if len(names) != len(dims):
            raise ValidationError(f"{len(names)} basis families for {len(dims)} subsystems")
        return tuple(get_basis(name, d) for name, d in zip(names, dims))

    def decompose(self, rho: DensityMatrix) -> BlochDecomposition:
        return decompose(rho, self.bases_for(rho.dims))

    def margin_function(self, state) -> Callable[[CriterionParams], float]:
        """Precompute the x-independent blocks of ``state`` and return params -> margin."""
        dec = state if isinstance(state, BlochDecomposition) else self.decompose(state)
        dims, kappas = dec.dims, dec.kappas
        if self.criterion == "thm1":
            if len(dims) != 2:
                raise ValidationError("thm1 needs a two-party state")

            def f(params):
                norm = trace_norm_matrix(ect_bipartite(dec, params))
                return norm - theorem1_bound(params, dims[0], dims[1], kappas[0], kappas[1])
            return f
        if self.criterion == "thm4":
            part = Bipartition.parse(self.bipartition)

            def f(params):
                return best_bipartition_report(dec, part, params, self.pivots, self.tol).margin
            return f
        if self.criterion == "thm5":
            parts = Bipartition.canonical(len(dims))
            variants = [
                p.pivot_variants() if self.pivots == "all"
                else [p.with_pivots(min(self.pivots[0], len(p.left)), min(self.pivots[1], len(p.right)))]
                for p in parts
            ]

            def f(params):
                norms = [
                    max(trace_norm_matrix(ect_multipartite(dec, v, params)) for v in vs)
                    for vs in variants
                ]
                bounds = [theorem4_bound(params, p, dims, kappas) for p in parts]
                return float(np.mean(norms)) - gme_threshold(zip(parts, bounds))
            return f
        margin6 = theorem6_check(dec, tol=self.tol).margin

        def f(params):
            return margin6
        return f

    def as_dict(self) -> dict:
        out = {
            "criterion": self.criterion,
            "bases": list(self.bases),
            "alpha": list(self.alpha),
            "beta": list(self.beta),
            "p1": self.p1,
            "p2": self.p2,
            "structure": self.structure,
            "pivots": self.pivots if self.pivots == "all" else list(self.pivots),
        }
        if self.structure == "fixed":
            out["u"] = list(self.u)
            out["v"] = list(self.v)
        if self.bipartition is not None:
            out["bipartition"] = self.bipartition
        return out


def golden_refine(f: Callable[[float], float], lo: float, mid: float, hi: float,
                  tol: float = 1e-8) -> tuple[float, float]:
    """Golden-section search for a maximum of ``f`` bracketed by (lo, mid, hi)."""
    try:
        x = optimize.golden(lambda t: -f(t), brack=(lo, mid, hi), tol=tol)
    except (ValueError, RuntimeError):
        return mid, f(mid)
    x = float(np.clip(x, lo, hi))
    return x, f(x)


def best_over_x(margin: Callable[[float], float], x_grid=None) -> tuple[float, float]:
    """(best margin, arg x): grid maximum polished by golden-section search."""
    xs = default_x_grid() if x_grid is None else np.asarray(x_grid, dtype=float)
    vals = np.array([margin(x) for x in xs])
    i = int(np.argmax(vals))
    best_x, best = float(xs[i]), float(vals[i])
    if 0 < i < len(xs) - 1:
        x, val = golden_refine(margin, xs[i - 1], xs[i], xs[i + 1])
        if val > best:
            best_x, best = x, val
    return best, best_x


def state_margin(config: CriterionConfig, state, x_grid=None) -> tuple[float, float]:
    """Margin maximized over x (x is reported as nan when it does not enter)."""
    f = config.margin_function(state)
    if not config.uses_x:
        return float(f(config.params(1.0))), float("nan")
    return best_over_x(lambda x: f(config.params(x)), x_grid)


@dataclass
class ScanResult:
    p_grid: np.ndarray
    margins: np.ndarray
    best_x: np.ndarray
    threshold: float | None
    bracket: tuple[float, float] | None
    width: float | None
    crossings: list[tuple[float, float]] = field(default_factory=list)
    detected_everywhere: bool = False
    message: str = ""

    @property
    def multiple_crossings(self) -> bool:
        return len(self.crossings) > 1

    def as_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "bracket": None if self.bracket is None else list(self.bracket),
            "width": self.width,
            "detected_everywhere": self.detected_everywhere,
            "multiple_crossings": self.multiple_crossings,
            "crossings": [list(c) for c in self.crossings],
            "message": self.message,
            "grid": [
                {"p": float(p), "margin": float(m), "x": None if np.isnan(x) else float(x)}
                for p, m, x in zip(self.p_grid, self.margins, self.best_x)
            ],
        }


def _map(fn, items, workers: int | None):
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def scan_threshold(family: StateFamily, config: CriterionConfig, x_grid=None,
                   p_step: float = 1e-2, tol: float = 1e-6, workers: int | None = None) -> ScanResult:
    """Smallest p whose max-over-x margin exceeds the decision tolerance.

    The coarse grid is not assumed monotone: every sign change is recorded and
    only the leftmost upward one is refined by bisection.
    """
    if not 0 < p_step <= 1:
        raise ValidationError("p_step must lie in (0, 1]")
    n = int(round(1.0 / p_step))
    p_grid = np.linspace(0.0, 1.0, n + 1)

    def at(p):
        return state_margin(config, family(float(p)), x_grid)

    results = _map(at, list(p_grid), workers)
    margins = np.array([r[0] for r in results])
    best_x = np.array([r[1] for r in results])
    positive = margins > config.tol

    crossings = [
        (float(p_grid[i]), float(p_grid[i + 1]))
        for i in range(len(p_grid) - 1)
        if positive[i] != positive[i + 1]
    ]
    if positive[0]:
        everywhere = bool(positive.all())
        msg = "margin positive across the whole grid" if everywhere else "margin positive at p = 0"
        return ScanResult(p_grid, margins, best_x, 0.0, None, None, crossings, everywhere, msg)
    upward = [i for i in range(len(p_grid) - 1) if not positive[i] and positive[i + 1]]
    if not upward:
        return ScanResult(p_grid, margins, best_x, None, None, None, crossings, False,
                          "no threshold in [0, 1]")
    i = upward[0]
    lo, hi = float(p_grid[i]), float(p_grid[i + 1])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if at(mid)[0] > config.tol:
            hi = mid
        else:
            lo = mid
    msg = "multiple sign changes on the coarse grid" if len(crossings) > 1 else ""
    return ScanResult(p_grid, margins, best_x, hi, (lo, hi), hi - lo, crossings, False, msg)


@dataclass(frozen=True)
class ShapeSpec:
    """Vector lengths and the free coordinates seen by the optimizer.

    ``x-sqrt``: coordinates (x, alpha..., beta...), u = x 1, v = sqrt|x| 1.
    ``free``:   coordinates (u..., v..., alpha..., beta...).
    """

    p1: int
    p2: int
    q1: int
    q2: int
    structure: str = "x-sqrt"

    def __post_init__(self):
        if min(self.p1, self.p2, self.q1, self.q2) < 1:
            raise ValidationError("all vector lengths must be >= 1")
        if self.structure not in ("x-sqrt", "free"):
            raise ValidationError(f"unknown shape structure {self.structure!r}")

    @property
    def size(self) -> int:
        if self.structure == "x-sqrt":
            return 1 + self.q1 + self.q2
        return self.p1 + self.p2 + self.q1 + self.q2

    def unpack(self, z) -> CriterionParams:
        z = np.asarray(z, dtype=float)
        if self.structure == "x-sqrt":
            x = z[0]
            alpha = z[1:1 + self.q1]
            beta = z[1 + self.q1:]
            return CriterionParams(np.full(self.p1, x), np.full(self.p2, np.sqrt(abs(x))), alpha, beta)
        a, b, c = self.p1, self.p1 + self.p2, self.p1 + self.p2 + self.q1
        return CriterionParams(z[:a], z[a:b], z[b:c], z[c:])

    def pack(self, params: CriterionParams) -> np.ndarray:
        if self.structure == "x-sqrt":
            return np.concatenate([[params.u[0]], params.alpha, params.beta])
        return np.concatenate([params.u, params.v, params.alpha, params.beta])


@dataclass
class OptimizeResult:
    params: CriterionParams
    relative_margin: float
    margin: float
    evaluations: int
    restarts: int
    seed: int | None
    budget_exhausted: bool = False

    def as_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "relative_margin": self.relative_margin,
            "margin": self.margin,
            "evaluations": self.evaluations,
            "restarts": self.restarts,
            "seed": self.seed,
            "budget_exhausted": self.budget_exhausted,
        }


def _relative(f, params: CriterionParams, bound_of) -> float:
    bound = bound_of(params)
    if not np.isfinite(bound) or bound <= 0:
        return -np.inf
    return f(params) / bound


def optimize_params(rho: DensityMatrix, config: CriterionConfig, shape: ShapeSpec, seed: int | None = 0,
                    restarts: int = 8, budget: int = 2000, initial: CriterionParams | None = None,
                    simplex_scale: float = 0.1) -> OptimizeResult:
    """Nelder-Mead over the free coordinates, maximizing margin / bound.

    Margins scale linearly with (u, alpha) and with (v, beta), so the raw
    margin is unbounded whenever it is positive; the ratio to the bound is the
    scale-free quantity that is maximized.  Its sign always matches the margin.
    """
    if config.criterion == "thm6":
        raise ValidationError("thm6 has no free parameters to optimize")
    dec = config.decompose(rho)
    f = config.margin_function(dec)
    bound_of = _bound_function(config, dec)
    rng = np.random.default_rng(seed)

    def objective(z):
        try:
            return -_relative(f, shape.unpack(z), bound_of)
        except ValidationError:
            return np.inf

    start = shape.pack(initial) if initial is not None else rng.normal(size=shape.size)
    best_z = np.asarray(start, dtype=float)
    best_val = objective(best_z)
    evals = 1
    exhausted = False
    if budget <= 0:
        p = shape.unpack(best_z) if initial is None else initial
        return OptimizeResult(p, -best_val, f(p), 0, 0, seed, False)

    starts = [best_z] + [rng.normal(size=shape.size) for _ in range(max(restarts, 0))]
    for z0 in starts:
        simplex = np.vstack([z0] + [z0 + simplex_scale * e for e in np.eye(len(z0))])
        res = optimize.minimize(
            objective, z0, method="Nelder-Mead",
            options={"maxfev": budget, "initial_simplex": simplex, "adaptive": False,
                     "xatol": 1e-10, "fatol": 1e-12},
        )
        evals += int(res.nfev)
        if res.status == 1:
            exhausted = True
        if not np.all(np.isfinite(res.x)) or not np.isfinite(res.fun):
            continue
        # ties broken on the coordinate vector so the winner does not depend on start order
        if res.fun < best_val or (res.fun == best_val and tuple(res.x) < tuple(best_z)):
            best_z, best_val = np.asarray(res.x, dtype=float), float(res.fun)

    params = shape.unpack(best_z)
    return OptimizeResult(params, -best_val, float(f(params)), evals, len(starts) - 1, seed, exhausted)


def _bound_function(config: CriterionConfig, dec: BlochDecomposition):
    dims, kappas = dec.dims, dec.kappas
    if config.criterion == "thm1":
        return lambda p: theorem1_bound(p, dims[0], dims[1], kappas[0], kappas[1])
    if config.criterion == "thm4":
        part = Bipartition.parse(config.bipartition)
        return lambda p: theorem4_bound(p, part, dims, kappas)
    parts = Bipartition.canonical(len(dims))
    return lambda p: gme_threshold(zip(parts, (theorem4_bound(p, q, dims, kappas) for q in parts)))


def margin_surface(family: StateFamily, config: CriterionConfig, p_grid, x_grid,
                   workers: int | None = None) -> list[tuple[float, float, float]]:
    """Rows (p, x, margin) over the full grid product, p outermost."""
    p_grid = [float(p) for p in p_grid]
    x_grid = [float(x) for x in x_grid]

    def row_block(p):
        f = config.margin_function(family(p))
        return [(p, x, float(f(config.params(x)))) for x in x_grid]

    blocks = _map(row_block, p_grid, workers)
    return [row for block in blocks for row in block]
