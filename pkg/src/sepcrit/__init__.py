"""Separability and genuine-entanglement tests built on correlation tensors."""
from .bases import OperatorBasis, get_basis, validate_basis
from .bloch import DensityMatrix, decompose, m_bound, partial_trace, reconstruct
from .criteria import (
    Bipartition,
    CriterionParams,
    CriterionReport,
    evaluate_bipartite,
    evaluate_bipartition,
    gme_scores,
    theorem6_check,
)
from .errors import ConvergenceError, ValidationError
from .numerics import BACKEND, tensor_trace_norm
from .search import CriterionConfig, ShapeSpec, optimize_params, scan_threshold

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Bipartition",
    "ConvergenceError",
    "CriterionConfig",
    "CriterionParams",
    "CriterionReport",
    "DensityMatrix",
    "OperatorBasis",
    "ShapeSpec",
    "ValidationError",
    "decompose",
    "evaluate_bipartite",
    "evaluate_bipartition",
    "get_basis",
    "gme_scores",
    "m_bound",
    "optimize_params",
    "partial_trace",
    "reconstruct",
    "scan_threshold",
    "tensor_trace_norm",
    "theorem6_check",
    "validate_basis",
]
