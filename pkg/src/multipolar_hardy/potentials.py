"""Multipolar L^p Hardy potentials, their constants and reference forms.

All potentials are evaluated from the pole distances ``d_i``, the unit
gradients ``grad d_i`` and the closed-form Laplacian/Hessian of distance in
constant curvature.  Inputs broadcast over leading axes of ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    DegeneratePointError,
    Hyperbolic,
    ModelManifold,
    PoleFrame,
    PoleSet,
    SingularPointError,
    SphereCap,
    G_matrix,
    POLE_CUTOFF,
    pair_difference_sq,
    pole_frame,
    rs_ratio_minus_one,
    s_ratio,
    v_norm_sq,
)

V_ZERO_CUTOFF = 1e-12


@dataclass(frozen=True)
class HardyParams:
    p: float
    N: int
    n: int
    C1: float
    C2: float
    beta: float


def make_params(p: float, N: int, n: int) -> HardyParams:
    """Constants of the n-pole inequality in dimension N.

    ``C1 = (N-p)^p / (n^p (p-1)^(p-1))``, ``C2 = (N-p)^(p-1) / (n^(p-1) (p-1)^(p-1))``
    and ``beta = (p-N)/(n(p-1))``, the exponent of the supersolution
    ``prod d_i^beta``.
    """
    if not (1.0 < p < N):
        raise ValueError(f"need 1 < p < N, got p={p}, N={N}")
    if int(n) != n or n < 2:
        raise ValueError(f"need an integer pole count n >= 2, got {n}")
    if int(N) != N or N < 3:
        raise ValueError(f"need an integer dimension N >= 3, got {N}")
    C1 = (N - p) ** p / (n**p * (p - 1) ** (p - 1))
    C2 = (N - p) ** (p - 1) / (n ** (p - 1) * (p - 1) ** (p - 1))
    beta = (p - N) / (n * (p - 1))
    return HardyParams(float(p), int(N), int(n), C1, C2, beta)


def _check(M: ModelManifold, poles: PoleSet, params: HardyParams, bipolar=False):
    if params.N != M.dim:
        raise ValueError(f"params are for N={params.N} but the manifold has dimension {M.dim}")
    if params.n != poles.n:
        raise ValueError(f"params are for n={params.n} poles, got {poles.n}")
    if bipolar and poles.n != 2:
        raise ValueError("bipolar potential needs exactly two poles")


def _v_powers(vn2, p, need_minus4):
    """Return (|v|^(p-2), |v|^(p-4) or None); raise on degenerate points."""
    vn = np.sqrt(np.maximum(vn2, 0.0))
    if p != 2 and p < 4:
        bad = vn < V_ZERO_CUTOFF
        if np.any(bad):
            raise DegeneratePointError("|v| vanishes where a negative power of it is needed", bad)
    pm2 = np.ones_like(vn) if p == 2 else vn ** (p - 2)
    pm4 = vn ** (p - 4) if need_minus4 else None
    return pm2, pm4


def _frame(M, poles, x, frame):
    return frame if frame is not None else pole_frame(M, poles, x)


def V_multipolar(
    M: ModelManifold,
    poles: PoleSet,
    params: HardyParams,
    x,
    frame: PoleFrame | None = None,
    groups: bool = False,
):
    """The n-pole potential in its general form.

    Four groups of terms: the leading ``C1 sum_{i<j}|grad d_i/d_i - grad d_j/d_j|^2 |v|^{p-2}``,
    the Laplacian group with centring ``N-p+1``, the Gram group
    ``-C2 (p-2) sum G_ij G_ik/(d_i^2 d_j d_k) |v|^{p-4}`` and the Hessian cross
    group.  For ``p == 2`` the last two are skipped.  With ``groups=True`` a
    dict of the four arrays is returned instead of their sum.
    """
    _check(M, poles, params)
    f = _frame(M, poles, x, frame)
    p, N = params.p, params.N
    d = f.d
    G = G_matrix(M, poles, x, f)
    inv = 1.0 / d
    vn2 = np.einsum("...i,...ij,...j->...", inv, G, inv)
    pm2, pm4 = _v_powers(vn2, p, p != 2)

    # d * Lap d - (N-p+1) = (N-1)(d s(d) - 1) + (p-2)
    centred = (N - 1) * rs_ratio_minus_one(M.curvature, d) + (p - 2)
    out = {
        "leading": params.C1 * pair_difference_sq(M, poles, x, f) * pm2,
        "laplacian": params.C2 * np.sum(centred * inv**2, axis=-1) * pm2,
    }
    if p != 2:
        # sum_{i,j,k} G_ij G_ik / (d_i^2 d_j d_k) = sum_i (sum_j G_ij/d_j)^2 / d_i^2
        proj = np.einsum("...ij,...j->...i", G, inv)
        gram = np.sum(proj**2 * inv**2, axis=-1)
        # Hess^{d_i}(grad d_k, grad d_j) = s_i (G_kj - G_ik G_ij); the i = j terms vanish
        s = s_ratio(M.curvature, d)
        H = s[..., :, None, None] * (G[..., None, :, :] - G[..., :, :, None] * G[..., :, None, :])
        hess = np.einsum("...ikj,...i,...k,...j->...", H, inv, inv, inv)
        out["gram"] = -params.C2 * (p - 2) * gram * pm4
        out["hessian"] = params.C2 * (p - 2) * hess * pm4
    else:
        zero = np.zeros_like(vn2)
        out["gram"] = zero
        out["hessian"] = zero
    if groups:
        return out
    return out["leading"] + out["laplacian"] + out["gram"] + out["hessian"]


def V_tilde(M: ModelManifold, poles: PoleSet, params: HardyParams, x, frame=None):
    """Constant-free leading part ``sum_{i<j}|grad d_i/d_i - grad d_j/d_j|^2 |v|^{p-2}``."""
    _check(M, poles, params)
    f = _frame(M, poles, x, frame)
    pm2, _ = _v_powers(v_norm_sq(M, poles, x, f), params.p, False)
    return pair_difference_sq(M, poles, x, f) * pm2


@dataclass(frozen=True)
class _Bipolar:
    d1: np.ndarray
    d2: np.ndarray
    G12: np.ndarray
    W: np.ndarray
    pm2: np.ndarray
    pm4: np.ndarray | None


def _bipolar_parts(M, poles, params, x, frame):
    f = _frame(M, poles, x, frame)
    d1, d2 = f.d[..., 0], f.d[..., 1]
    G12 = M.metric_inner(f.x, f.grads[..., 0, :], f.grads[..., 1, :])
    vn2 = 1.0 / d1**2 + 1.0 / d2**2 + 2.0 * G12 / (d1 * d2)
    W = 1.0 / d1**2 + 1.0 / d2**2 - 2.0 * G12 / (d1 * d2)
    pm2, pm4 = _v_powers(vn2, params.p, params.p != 2)
    return _Bipolar(d1, d2, G12, W, pm2, pm4)


def V_bipolar(
    M: ModelManifold,
    poles: PoleSet,
    params: HardyParams,
    x,
    frame: PoleFrame | None = None,
    groups: bool = False,
):
    """Two-pole potential in the simplified form with ``N-1`` centring.

    Hessian cross terms reduce to ``Hess^{d_1}(grad d_2, grad d_2) = s(d_1)(1 - G_12^2)``
    and the compensating ``2(p-2) C2 (1-G_12^2)/(d_1^2 d_2^2) |v|^{p-4}`` term.
    """
    _check(M, poles, params, bipolar=True)
    b = _bipolar_parts(M, poles, params, x, frame)
    p, N = params.p, params.N
    c = M.curvature
    s1, s2 = s_ratio(c, b.d1), s_ratio(c, b.d2)
    lap = (N - 1) * sum(rs_ratio_minus_one(c, d) / d**2 for d in (b.d1, b.d2))
    out = {
        "leading": params.C1 * b.W * b.pm2,
        "laplacian": params.C2 * lap * b.pm2,
    }
    if p != 2:
        perp = 1.0 - b.G12**2
        dd = b.d1**2 * b.d2**2
        out["gram"] = 2.0 * (p - 2) * params.C2 * perp / dd * b.pm4
        hess = s1 * perp / (b.d1 * b.d2**2) + s2 * perp / (b.d1**2 * b.d2)
        out["hessian"] = (p - 2) * params.C2 * hess * b.pm4
    else:
        zero = np.zeros_like(b.W)
        out["gram"] = zero
        out["hessian"] = zero
    if groups:
        return out
    return out["leading"] + out["laplacian"] + out["gram"] + out["hessian"]


def V_euclid_multipolar_p2(poles, N: int, x):
    """``(N-2)^2/n^2 sum_{i<j} |a_i-a_j|^2/(|x-a_i|^2 |x-a_j|^2)`` from chart coordinates only."""
    P = np.atleast_2d(np.asarray(poles.poles if isinstance(poles, PoleSet) else poles, dtype=float))
    x = np.asarray(x, dtype=float)
    n = P.shape[0]
    sq = np.sum((x[..., None, :] - P) ** 2, axis=-1)
    if np.any(sq < POLE_CUTOFF**2):
        raise SingularPointError("point coincides with a pole", np.any(sq < POLE_CUTOFF**2, axis=-1))
    total = np.zeros(x.shape[:-1])
    for i in range(n):
        for j in range(i + 1, n):
            total = total + np.sum((P[i] - P[j]) ** 2) / (sq[..., i] * sq[..., j])
    return (N - 2) ** 2 / n**2 * total


def V_euclid_bipolar_lp(a1, a2, N: int, p: float, x):
    """Flat two-pole L^p potential written with the midpoint ``a = (a1+a2)/2``."""
    if not (2 <= p < N):
        raise ValueError("need 2 <= p < N")
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    x = np.asarray(x, dtype=float)
    a = 0.5 * (a1 + a2)
    e1 = x - a1
    e2 = x - a2
    d1 = np.sqrt(np.sum(e1 * e1, axis=-1))
    d2 = np.sqrt(np.sum(e2 * e2, axis=-1))
    hit = (d1 < POLE_CUTOFF) | (d2 < POLE_CUTOFF)
    if np.any(hit):
        raise SingularPointError("point coincides with a pole", hit)
    r = np.sqrt(np.sum((x - a) ** 2, axis=-1))
    if p < 4 and p != 2 and np.any(r < V_ZERO_CUTOFF):
        raise DegeneratePointError("evaluation at the midpoint", r < V_ZERO_CUTOFF)
    k = (N - p) / (p - 1)
    sep2 = np.sum((a1 - a2) ** 2)
    first = (p - 1) / 4 * k**p * sep2 * r ** (p - 2) / (d1**p * d2**p)
    if p == 2:
        return first
    cross = np.sum(e1 * e2, axis=-1)
    second = (p - 2) / 2 * k ** (p - 1) * r ** (p - 4) / (d1**p * d2**p) * (d1**2 * d2**2 - cross**2)
    return first + second


def coth_gap_bound(t):
    """``t coth t - 1 - 3 t^2/(pi^2 + t^2)``, nonnegative for t > 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("coth_gap_bound needs t >= 0")
    t2 = t * t
    series = t2 / 3 - t2**2 / 45 + 2 * t2**3 / 945 - t2**4 / 4725
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = t / np.tanh(t) - 1.0
    head = np.where(t < 0.1, series, direct)
    return head - 3.0 * t2 / (np.pi**2 + t2)


def c_delta(delta):
    """Hemisphere remainder constant ``(7 pi^2 - 3 s^2) / (pi^2 (s^2 - pi^2))`` with ``s = delta + pi/2``."""
    delta = np.asarray(delta, dtype=float)
    if np.any(delta < 0) or np.any(delta >= np.pi / 2):
        raise ValueError("c_delta needs 0 <= delta < pi/2")
    s2 = (delta + np.pi / 2) ** 2
    return (7 * np.pi**2 - 3 * s2) / (np.pi**2 * (s2 - np.pi**2))


def cot_mittag_leffler(t, K: int, block: int = 4096):
    """Partial sum ``1/t + 2t sum_{k=1}^K 1/(t^2 - pi^2 k^2)`` of the cotangent expansion."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0) or np.any(t >= np.pi):
        raise ValueError("cot_mittag_leffler needs 0 < t < pi")
    if int(K) != K or K < 1:
        raise ValueError("K must be a positive integer")
    t2 = t[..., None] ** 2
    acc = np.zeros(t.shape)
    # smallest terms first
    for hi in range(int(K), 0, -block):
        k = np.arange(max(hi - block + 1, 1), hi + 1, dtype=float)[::-1]
        acc = acc + np.sum(1.0 / (t2 - (np.pi * k) ** 2), axis=-1)
    return 1.0 / t + 2.0 * t * acc


def V_lower_CH(M: Hyperbolic, poles: PoleSet, params: HardyParams, x, frame=None):
    """Curvature-explicit lower bound for the two-pole potential when curvature is ``-R^2``."""
    if not isinstance(M, Hyperbolic):
        raise TypeError("V_lower_CH is defined on the hyperbolic model")
    _check(M, poles, params, bipolar=True)
    p = params.p
    if not (2 <= p < params.N):
        raise ValueError("need 2 <= p < N")
    b = _bipolar_parts(M, poles, params, x, frame)
    R2 = M.R**2
    lap = sum(3 * R2 / (np.pi**2 + R2 * d**2) for d in (b.d1, b.d2))
    val = params.C1 * b.W * b.pm2 + (params.N - 1) * params.C2 * lap * b.pm2
    if p != 2:
        perp = (1.0 - b.G12**2) / (b.d1**2 * b.d2**2)
        brk = sum(2 + 3 * d**2 * R2 / (np.pi**2 + R2 * d**2) for d in (b.d1, b.d2))
        val = val + (p - 2) * params.C2 * perp * brk * b.pm4
    return val


def V_lower_sphere(M: SphereCap, poles: PoleSet, params: HardyParams, x, delta=None, frame=None):
    """Lower bound for the two-pole potential on the hemisphere via ``c(delta)``."""
    if not isinstance(M, SphereCap):
        raise TypeError("V_lower_sphere is defined on the sphere cap")
    _check(M, poles, params, bipolar=True)
    p = params.p
    if not (2 <= p < params.N):
        raise ValueError("need 2 <= p < N")
    x = M.check(x)
    if delta is None:
        delta = poles.delta
    c = float(c_delta(delta))
    b = _bipolar_parts(M, poles, params, x, frame)
    val = params.C1 * b.W * b.pm2 + (params.N - 1) * params.C2 * c * b.pm2
    if p != 2:
        perp = (1.0 - b.G12**2) / (b.d1**2 * b.d2**2)
        val = val + (p - 2) * params.C2 * (4 + c * (b.d1**2 + b.d2**2)) * perp * b.pm4
    return val


def bipolar_C1(p: float, N: int) -> float:
    """``C1(2, p)`` written as ``(p-1) ((N-p)/(2(p-1)))^p``."""
    return (p - 1) * ((N - p) / (2 * (p - 1))) ** p


__all__ = [
    "HardyParams",
    "make_params",
    "V_multipolar",
    "V_tilde",
    "V_bipolar",
    "V_euclid_multipolar_p2",
    "V_euclid_bipolar_lp",
    "coth_gap_bound",
    "c_delta",
    "cot_mittag_leffler",
    "V_lower_CH",
    "V_lower_sphere",
    "bipolar_C1",
]

