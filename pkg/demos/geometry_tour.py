"""
Distances, gradients and the comparison formulas
=================================================

The three model spaces share one interface.  Here we check the distance
against closed forms, the eikonal equation ``|grad d| = 1`` and the exact
Laplacian ``(N-1) s'/s`` against finite differences.
"""

import numpy as np

from multipolar_hardy.geometry import Euclidean, Hyperbolic, SphereCap, s_ratio
from multipolar_hardy.verify import eikonal_check

# %%
# Closed-form distances: the chart point 0.5 e_1 of the Poincare ball sits
# at distance ln 3 from the origin; on the sphere, north pole to equator is pi/2.
H = Hyperbolic(3, R=1.0)
print("hyperbolic d(0, 0.5 e1) =", H.distance(np.zeros(3), np.array([0.5, 0, 0])), "ln 3 =", np.log(3))
S = SphereCap(3)
print("sphere d(north, equator) =", S.distance(S.origin, np.array([1.0, 0, 0, 0])))

# %%
# The comparison profile: coth in negative curvature, cot in positive.
for c in (-1.0, 0.0, 1.0):
    print(f"s'/s at r=1, c={c:+.0f}:", float(s_ratio(c, 1.0)))

# %%
# Eikonal equation and second derivatives of distance, at seeded point pairs.
for M in (Euclidean(4), Hyperbolic(4, 0.5), SphereCap(4)):
    out = eikonal_check(M, count=500, fd_count=50, seed=0)
    print(
        f"{M.kind:>10}: ||grad d|-1| {out['gradient_norm']:.1e}, "
        f"Laplacian vs FD {out['laplacian_fd']:.1e}, Hessian vs FD {out['hessian_fd']:.1e}"
    )
