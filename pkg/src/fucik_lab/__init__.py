"""Numerical laboratory for half-eigenvalues of -u'' = lam (m u^+ - t n u^-)."""
from .weights import PiecewiseConstantWeight, ScaledWeight, average, constant, scale, value_at
from .shooting import ShootingError, kth_zero, propagate_cell, shoot
from .spectrum import (
    HalfEigenvalue,
    SolverError,
    bracket,
    limit_half_eigenvalue,
    solve_half_eigenvalue,
    symmetry_check,
    trace_curve,
    trivial_curves,
)

__version__ = "0.1.0"
