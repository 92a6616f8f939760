"""Dual-bounded nonlinear optimal transport solved by Frank-Wolfe (DNF),
with size-constrained min-cut clustering as the worked application."""

__version__ = "0.1.0"

from .constraints import (
    ApproximateProjectionWarning,
    DualBoundedSet,
    EmptyConstraintSetError,
    check_feasible,
    dykstra_project,
    project_row_simplex,
)
from .entropic import KernelUnderflowError, feasible_gradient_entropic
from .graph import LabeledDataset, initial_plan, knn_gaussian_affinity, read_csv
from .linalg import SparseAffinity
from .metrics import accuracy, ari, labels_from_plan, nmi
from .mincut import ConvexLaplacianOracle, MinCutOracle
from .solver import Measure, ObjectiveOracle, SolveConfig, SolveReport, StepRule, solve

__all__ = [
    "ApproximateProjectionWarning",
    "ConvexLaplacianOracle",
    "DualBoundedSet",
    "EmptyConstraintSetError",
    "KernelUnderflowError",
    "LabeledDataset",
    "Measure",
    "MinCutOracle",
    "ObjectiveOracle",
    "SolveConfig",
    "SolveReport",
    "SparseAffinity",
    "StepRule",
    "accuracy",
    "ari",
    "check_feasible",
    "dykstra_project",
    "feasible_gradient_entropic",
    "initial_plan",
    "knn_gaussian_affinity",
    "labels_from_plan",
    "nmi",
    "project_row_simplex",
    "read_csv",
    "solve",
]
