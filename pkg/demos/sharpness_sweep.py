"""
Sharpness of the constant at p = 2
===================================

At ``p = 2`` no extremal exists, but the quotients of the annular test
functions ``u_eps`` decrease toward the constant as ``eps`` shrinks.
"""

import numpy as np

from multipolar_hardy.geometry import Hyperbolic, PoleSet
from multipolar_hardy.potentials import make_params
from multipolar_hardy.quadrature import QuadConfig
from multipolar_hardy.verify import sharpness_sweep, sweep_checks

M = Hyperbolic(4, R=1.0)
P = PoleSet(M, np.array([[0.5, 0, 0, 0], [-0.5, 0, 0, 0]]))
h = make_params(2, 4, 2)
rows = sharpness_sweep(M, P, h, [0.2, 0.1, 0.05, 0.025], QuadConfig(total_samples=200_000))

# %%
print(f"{'eps':>6} {'I':>10} {'J':>10} {'K':>10} {'ratio':>8}")
for r in rows:
    print(f"{r.eps:6.3f} {r.I:10.4g} {r.J:10.4g} {r.K:10.4g} {r.ratio:8.4f}")
print("target C1 =", h.C1)
print(sweep_checks(rows, h.C1))
