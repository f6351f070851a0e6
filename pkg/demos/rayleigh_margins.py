"""
Checking the inequality on smooth test functions
=================================================

For a test function u the inequality reads ``I = int |grad u|^p`` at least
``J = int V |u|^p``.  Both integrals are estimated on the same stratified
samples, so the margin ``I - J`` has a small standard error of its own.
"""

from multipolar_hardy.geometry import Hyperbolic, SphereCap
from multipolar_hardy.potentials import make_params
from multipolar_hardy.quadrature import QuadConfig
from multipolar_hardy.verify import check_inequality, default_bumps, symmetric_poles

cfg = QuadConfig(total_samples=100_000, seed=0)

# %%
# Hyperbolic space, p = 2.5: ten seeded sums of mollifier bumps.
M = Hyperbolic(4, R=1.0)
P = symmetric_poles(M, 0.6)
rows, rate = check_inequality(M, P, make_params(2.5, 4, 2), default_bumps(M, P, seed=1, count=10), "full", cfg)
for k, margin, ok, rep in rows:
    print(f"bump {k}: I/J = {rep.ratio:.3f} +- {rep.ratio * rep.rel_error:.3f}, margin {margin:.3g}, pass {ok}")
print("pass rate", rate)

# %%
# On the hemisphere the curvature-explicit lower bound also works as a potential.
S = SphereCap(4)
Q = symmetric_poles(S, 0.4)
_, rate = check_inequality(S, Q, make_params(2, 4, 2), default_bumps(S, Q, seed=2, count=10), "sphere_lower", cfg)
print("sphere, lower-bound potential: pass rate", rate)
