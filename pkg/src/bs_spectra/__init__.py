"""Bound states, resolvents and operator norms of 1D Schroedinger operators
``-d^2/dx^2 + V`` with distributional potentials ``V in H^-1(R)``, computed
through the Birman-Schwinger operator ``A_V(z) = -(H0 - z)^(-1/2) V (H0 - z)^(-1/2)``.
"""
from .bs_core import (
    BSMatrix,
    BSOperator,
    SpectralParameter,
    assemble,
    fredholm_det,
    hs_norm,
    hs_norm_formula,
    operator_norm,
    spectrum,
    sqrt_branch,
    top_eigenpairs,
    trace,
    trace_formula,
    verify_hypothesis,
)
from .errors import (
    BadParameter,
    BisectionStall,
    BSError,
    EigenFailure,
    GridMismatch,
    NearPole,
    NonIntegrable,
    SpectrumPoint,
    UndefinedIntegral,
)
from .fourier import FrequencyGrid, GridFunction, default_grid, make_grid
from .potential import DistributionalPotential, from_config, h_minus_one_norm
from .resolvent import ResolventHandle
from .spectral_solver import BoundState, eigencurves, find_bound_states

__version__ = "0.1.0"

__all__ = [
    "BSError", "BadParameter", "BisectionStall", "BoundState", "BSMatrix", "BSOperator",
    "DistributionalPotential", "EigenFailure", "FrequencyGrid", "GridFunction", "GridMismatch",
    "NearPole", "NonIntegrable", "ResolventHandle", "SpectralParameter", "SpectrumPoint",
    "UndefinedIntegral", "assemble", "default_grid", "eigencurves", "find_bound_states",
    "fredholm_det", "from_config", "h_minus_one_norm", "hs_norm", "hs_norm_formula", "make_grid",
    "operator_norm", "spectrum", "sqrt_branch", "top_eigenpairs", "trace", "trace_formula",
    "verify_hypothesis",
]
