"""Exact computation of rank-2 cluster scattering diagrams."""

from .engine import TauTable, compute_csd, g_factor, t_factor, verify_consistency
from .fit import FitResult, fit_tau, tau_g_coeff
from .ring import Poly3, from_text, poly_eval, to_text

__all__ = [
    "Poly3",
    "TauTable",
    "FitResult",
    "compute_csd",
    "fit_tau",
    "from_text",
    "g_factor",
    "poly_eval",
    "t_factor",
    "tau_g_coeff",
    "to_text",
    "verify_consistency",
]
__version__ = "0.1.0"
