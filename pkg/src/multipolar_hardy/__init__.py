"""Numerical verification of multipolar L^p Hardy inequalities on model spaces.

The package evaluates the singular potentials in flat, hyperbolic and
spherical geometry, builds test functions, estimates the two sides of the
inequality by stratified Monte Carlo in geodesic polar coordinates and
packages the checks as seeded, reproducible experiments.
"""

from .functions import (
    Annulus,
    Ball,
    ScalarField,
    UnionOf,
    WholeChart,
    bump,
    bump_family,
    bump_sum,
    fd_gradient,
    phi_minimizer,
    phi_power_product,
    u_epsilon,
)
from .geometry import (
    Euclidean,
    Hyperbolic,
    PoleSet,
    SphereCap,
    distance,
    grad_distance,
    hessian_distance_form,
    laplacian_distance,
    make_manifold,
    metric_norm,
    s_func,
    s_ratio,
)
from .potentials import (
    HardyParams,
    V_bipolar,
    V_lower_CH,
    V_lower_sphere,
    V_multipolar,
    V_tilde,
    bipolar_C1,
    make_params,
)
from .quadrature import QuadConfig, QuadratureError, QuadratureEstimate, integrate
from .verify import (
    check_inequality,
    minimizer_equality,
    positivity_audit,
    rayleigh,
    sharpness_sweep,
    weak_supersolution_residual,
)

__version__ = "0.1.0"
