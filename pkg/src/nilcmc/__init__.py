"""Constant mean curvature graphs in the Heisenberg space H(tau).

Closed-form geometry of H(tau), mean curvature of graphs, cylinders and
cones, comparison barriers, and a finite-difference Dirichlet solver.
"""
__version__ = "0.1.0"

from .exceptions import ConvergenceError, SingularityError, ValidationError
from .geometry import AmbientParams, Point3, TangentVector
from .domain import BoundaryCurve, Grid, ScalarField, build_boundary, build_grid, fourier_data
from .curvature import ConeSpec, cone_mean_curvature, cylinder_mean_curvature, q_residual
from .barriers import LogBarrier, check_sign, cone_height_field, select_cone_heights
from .solver import CMCGraphSolver, SolveResult, SolveSpec, continuity_solve, exhaustion_solve, newton_solve

__all__ = [
    "__version__",
    "ConvergenceError",
    "SingularityError",
    "ValidationError",
    "AmbientParams",
    "Point3",
    "TangentVector",
    "BoundaryCurve",
    "Grid",
    "ScalarField",
    "build_boundary",
    "build_grid",
    "fourier_data",
    "ConeSpec",
    "cone_mean_curvature",
    "cylinder_mean_curvature",
    "q_residual",
    "LogBarrier",
    "check_sign",
    "cone_height_field",
    "select_cone_heights",
    "CMCGraphSolver",
    "SolveResult",
    "SolveSpec",
    "continuity_solve",
    "exhaustion_solve",
    "newton_solve",
]
