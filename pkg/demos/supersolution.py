"""
The supersolution behind the inequality
========================================

The potential is built so that ``phi = prod d_i^beta`` solves
``-Delta_p phi = V phi^(p-1)``.  We test the weak form against bumps, then
look at the sign of each term group of V.
"""

from multipolar_hardy.geometry import Hyperbolic, SphereCap
from multipolar_hardy.potentials import make_params
from multipolar_hardy.quadrature import QuadConfig
from multipolar_hardy.verify import default_bumps, positivity_audit, symmetric_poles, weak_supersolution_residual

M = Hyperbolic(4, R=1.0)
P = symmetric_poles(M, 0.6)
h = make_params(3, 4, 2)

# %%
for r in weak_supersolution_residual(M, P, h, default_bumps(M, P, seed=3, count=3), QuadConfig(100_000)):
    print(f"lhs {r.lhs.value:.5g}  rhs {r.rhs.value:.5g}  residual {100 * r.residual:.2f}%")

# %%
# Group signs: asserted on hyperbolic space, informational on the sphere.
for X in (Hyperbolic(5), SphereCap(5)):
    Q = symmetric_poles(X, 0.6)
    rep = positivity_audit(X, Q, make_params(3, 5, 2), 5000, seed=0)
    mins = {k: f"{v['min_relative']:.2g}" for k, v in rep.groups.items()}
    print(X.kind, "asserted" if rep.asserted else "report only", mins)
