"""
The multipolar potential and its special cases
===============================================

In flat space the general potential collapses to classical closed forms; in
curved space it is bounded below by simpler curvature-explicit expressions.
"""

import numpy as np

from multipolar_hardy.geometry import Euclidean, Hyperbolic, PoleSet, SphereCap
from multipolar_hardy.potentials import (
    V_bipolar,
    V_euclid_multipolar_p2,
    V_lower_CH,
    V_lower_sphere,
    V_multipolar,
    make_params,
)
from multipolar_hardy.verify import reduction_check, scalar_bounds_check, symmetric_poles

# %%
# Three poles in R^4 at p = 2: the general formula equals the classical one.
M = Euclidean(4)
poles = PoleSet(M, np.array([[1.0, 0, 0, 0], [-0.5, 0.8, 0, 0], [-0.5, -0.8, 0, 0]]))
x = np.random.default_rng(0).normal(size=(5, 4))
print(V_multipolar(M, poles, make_params(2, 4, 3), x))
print(V_euclid_multipolar_p2(poles, 4, x))

# %%
# Two poles and p = 3 in R^5, over 1000 seeded points.
print(reduction_check(5, [[0.5, 0, 0, 0, 0], [-0.5, 0, 0, 0, 0]], 3.0, 1000, seed=1))

# %%
# Lower bounds: V_bipolar minus the curvature bound stays nonnegative.
H = Hyperbolic(4, R=1.0)
P = symmetric_poles(H, 0.6)
h = make_params(3, 4, 2)
y = H.polar_point(H.origin, np.linspace(0.05, 2.0, 8), H.random_directions(H.origin, np.random.default_rng(2), 8))
print("hyperbolic margins:", V_bipolar(H, P, h, y) - V_lower_CH(H, P, h, y))

S = SphereCap(4)
P = symmetric_poles(S, 0.3)
z = S.polar_point(S.origin, np.linspace(0.05, 1.4, 8), S.random_directions(S.origin, np.random.default_rng(3), 8))
print("sphere margins:", V_bipolar(S, P, h, z) - V_lower_sphere(S, P, h, z))

# %%
# The scalar inequalities behind those bounds, scanned on fine grids.
print(scalar_bounds_check())
