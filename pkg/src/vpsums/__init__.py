"""Vallee Poussin sums and their interpolation analogs on classes of entire periodic functions.

Spectral trigonometric polynomials, the (psi, beta) calculus, best
approximation solvers, extremal constructions and an experiment harness that
checks deviation bounds numerically.
"""

from .trig_core import NormIndex, SampledFunction, TrigPolynomial, UniformGrid, vp_sum
from .psi_calculus import PsiBetaWeight, make_beta, make_psi, psi_derivative, psi_integral

__all__ = [
    "NormIndex",
    "PsiBetaWeight",
    "SampledFunction",
    "TrigPolynomial",
    "UniformGrid",
    "make_beta",
    "make_psi",
    "psi_derivative",
    "psi_integral",
    "vp_sum",
]
