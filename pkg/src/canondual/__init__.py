"""Canonical-duality global optimization for nonconvex polynomial benchmarks.

The nonconvex objective is rewritten through quadratic measures and a
convex quadratic so that its dual is concave over a PSD-constrained convex
region; a dual critical point found there recovers the primal global
minimizer with zero duality gap, and the package certifies that recovery
against exact symbolic identities and brute-force oracles.
"""

from .benchmarks import SolveReport, gp_solve, thc_solve
from .canonical import CanonicalProblem, ConvexQuadV, DualPoint, QuadOperator
from .dual_solver import Certificate, CriticalReport, SolverConfig, solve_canonical
from .oracle import Box, OracleResult, grid_scan, multistart, univariate_global
from .polynomial import MultiPoly
from .smallmat import SymMatrix, Vector

__version__ = "0.1.0"

__all__ = [
    "Box",
    "CanonicalProblem",
    "Certificate",
    "ConvexQuadV",
    "CriticalReport",
    "DualPoint",
    "MultiPoly",
    "OracleResult",
    "QuadOperator",
    "SolveReport",
    "SolverConfig",
    "SymMatrix",
    "Vector",
    "__version__",
    "gp_solve",
    "grid_scan",
    "multistart",
    "solve_canonical",
    "thc_solve",
    "univariate_global",
]
