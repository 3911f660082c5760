"""Moment polynomials of the Riemann zeta function.

High-precision coefficients ``c_r(k)`` from the Euler product with a cubic
convergence accelerant, an independent low-order cross-check, and a
desk-scale comparison against empirical moments on the critical line.
"""

__version__ = "0.1.0"

from .coeffdata import load_coefficients, save_coefficients, shipped_coefficients
from .critical_line import ZeroTable, find_zeros, hardy_Z
from .engine import compute_coefficients, stability_check
from .method1 import method1_coefficients
from .moments import compare_moments, conjecture_moment, data_moment
from .mpcontext import RunConfig, make_run_config
from .polynomial import MomentPolynomial

__all__ = [
    "MomentPolynomial",
    "RunConfig",
    "ZeroTable",
    "compare_moments",
    "compute_coefficients",
    "conjecture_moment",
    "data_moment",
    "find_zeros",
    "hardy_Z",
    "load_coefficients",
    "make_run_config",
    "method1_coefficients",
    "save_coefficients",
    "shipped_coefficients",
    "stability_check",
]
