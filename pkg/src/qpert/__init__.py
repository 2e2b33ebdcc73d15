"""Convex QP toolkit: interior-point solving with controlled perturbations,
online active-set / tripartition prediction, and active-set crossover."""

from .model import (
    Iterate,
    Perturbation,
    StandardQP,
    Tripartition,
    kkt_residuals,
    mu_lambda,
    optimal_partition,
    relative_residual,
    shifted_problem,
    validate_problem,
)
from .ipm import SolveOptions, SolveReport, solve
from .gen import GenParams, generate_qts1, generate_qts2

__all__ = [
    "GenParams",
    "Iterate",
    "Perturbation",
    "SolveOptions",
    "SolveReport",
    "StandardQP",
    "Tripartition",
    "generate_qts1",
    "generate_qts2",
    "kkt_residuals",
    "mu_lambda",
    "optimal_partition",
    "relative_residual",
    "shifted_problem",
    "solve",
    "validate_problem",
]
