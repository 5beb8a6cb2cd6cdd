"""Asymptotics of u_t + phi(u)_x = eps u_xx near large-gradient and A-type singularities.

Submodules
----------
flux           convex flux models phi with derivatives
specfun        half-normalised erfc, heat convolution, phase-integral moments
fold           real roots of U^(2n+1) - tau U + xi = 0 and the Laplace branch
colehopf       Cole-Hopf inner solutions w10 and u_in, scaling exponents
initial_layer  step-data solution Gamma, composite and renormalised formulas
oracle         implicit conservative finite-difference reference solver
verify         residual ratios, order fits, region predicates, field norms
cli            command-line experiments
"""

from .flux import FluxModel
from .specfun import (
    PhaseIntegralSpec,
    ScaledValue,
    erfc_paper,
    heat_convolution,
    phase_integral,
    r000,
)
from .fold import FoldQuery, FoldResult, fold_root, outer_leading
from .colehopf import (
    InnerPoint,
    ScalingExponents,
    scaling_exponents,
    u_inner,
    u_inner_t,
    u_inner_x,
    w10,
)

__all__ = [
    "FluxModel",
    "PhaseIntegralSpec",
    "ScaledValue",
    "erfc_paper",
    "heat_convolution",
    "phase_integral",
    "r000",
    "FoldQuery",
    "FoldResult",
    "fold_root",
    "outer_leading",
    "InnerPoint",
    "ScalingExponents",
    "scaling_exponents",
    "u_inner",
    "u_inner_t",
    "u_inner_x",
    "w10",
]

__version__ = "0.1.0"
