"""Numerical experiments: Rayleigh quotients, inequality margins, the
extremal equality, the epsilon-sharpness sweep, sign audits of the potential
and the weak form of the supersolution identity.

All integrals that are compared with each other are estimated on one shared
sample set, so the reported margins and gaps carry the (much smaller)
standard error of the difference rather than the sum of two errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .functions import (
    Ball,
    ScalarField,
    WholeChart,
    bump_family,
    fd_gradient,
    minimizer_exponent,
    phi_minimizer,
    phi_power_product,
    u_epsilon,
)
from .geometry import (
    Euclidean,
    Hyperbolic,
    ModelManifold,
    PointError,
    PoleSet,
    SphereCap,
    hessian_distance_form,
    laplacian_distance,
    pole_frame,
    s_func,
    sphere_area,
    v_norm_sq,
)
from .potentials import (
    HardyParams,
    V_bipolar,
    V_euclid_bipolar_lp,
    V_euclid_multipolar_p2,
    c_delta,
    coth_gap_bound,
    cot_mittag_leffler,
    V_lower_CH,
    V_lower_sphere,
    V_multipolar,
    V_tilde,
    _v_powers,
    make_params,
)
from .quadrature import QuadConfig, QuadratureEstimate, integrate

INEQUALITY_SIGMAS = 3.0
EQUALITY_SIGMAS = 5.0
EQUALITY_TOL = 0.02

POTENTIAL_TAGS = ("full", "tilde", "ch_lower", "sphere_lower")
SIGNED_GROUPS = ("leading", "laplacian", "hessian", "total")


@dataclass(frozen=True)
class RayleighReport:
    I: QuadratureEstimate
    J: QuadratureEstimate
    margin: QuadratureEstimate
    ratio: float
    potential_tag: str
    params: HardyParams

    @property
    def rel_error(self) -> float:
        """Relative standard error of the quotient ``I/J`` (delta method).

        I and J share samples; their covariance follows from the variance of
        the margin estimate, ``Var(I - J) = Var I + Var J - 2 Cov``.
        """
        I, J, D = self.I, self.J, self.margin
        if I.value == 0 or J.value == 0:
            return float(np.hypot(I.rel_error, J.rel_error))
        cov = 0.5 * (I.std_error**2 + J.std_error**2 - D.std_error**2)
        var = I.rel_error**2 + J.rel_error**2 - 2.0 * cov / (I.value * J.value)
        return float(np.sqrt(max(var, 0.0)))

    @property
    def passed(self) -> bool:
        return self.margin.value >= -INEQUALITY_SIGMAS * self.margin.std_error


@dataclass(frozen=True)
class SweepRow:
    eps: float
    I: float
    J: float
    K: float
    ratio: float
    std_errors: tuple[float, float, float]
    ratio_std_error: float = 0.0


@dataclass(frozen=True)
class EqualityReport:
    I: QuadratureEstimate
    J: QuadratureEstimate
    difference: QuadratureEstimate
    gap: float
    rel_error: float
    tolerance: float
    passed: bool
    boundary_flux: QuadratureEstimate | None = None
    truncation_radius: float | None = None
    notes: str = ""


@dataclass(frozen=True)
class ResidualReport:
    lhs: QuadratureEstimate
    rhs: QuadratureEstimate
    difference: QuadratureEstimate
    residual: float
    rel_error: float
    tolerance: float
    passed: bool


@dataclass
class AuditReport:
    groups: dict = field(default_factory=dict)
    samples: int = 0
    skipped: int = 0
    asserted: bool = False
    passed: bool = True


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _on_subset(fn, x, on):
    """Evaluate ``fn`` on ``x[on]``, re-indexing a point-error mask to the full batch."""
    try:
        return fn(x[on])
    except PointError as err:
        if err.mask is not None and np.shape(err.mask) == (int(on.sum()),):
            full = np.zeros(x.shape[0], dtype=bool)
            full[np.flatnonzero(on)[np.asarray(err.mask)]] = True
            raise type(err)(str(err), full) from None
        raise


def potential_function(M: ModelManifold, poles: PoleSet, params: HardyParams, tag: str):
    """Pointwise potential selected by ``tag``.

    ``full`` is the general n-pole potential, ``tilde`` its leading part
    ``C1 * V_tilde``, ``ch_lower`` and ``sphere_lower`` the curvature-bound
    replacements (two poles, hyperbolic and sphere cap respectively).
    """
    if tag == "full":
        if poles.n == 2:
            return lambda x: V_bipolar(M, poles, params, x)
        return lambda x: V_multipolar(M, poles, params, x)
    if tag == "tilde":
        return lambda x: params.C1 * V_tilde(M, poles, params, x)
    if tag == "ch_lower":
        if not isinstance(M, Hyperbolic):
            raise ValueError("the ch_lower potential is defined on the hyperbolic model")
        return lambda x: V_lower_CH(M, poles, params, x)
    if tag == "sphere_lower":
        if not isinstance(M, SphereCap):
            raise ValueError("the sphere_lower potential is defined on the sphere cap")
        return lambda x: V_lower_sphere(M, poles, params, x)
    raise ValueError(f"unknown potential tag {tag!r}; expected one of {POTENTIAL_TAGS}")


def _check_params(M, poles, params, tag="full"):
    if params.N != M.dim or params.n != poles.n:
        raise ValueError("params do not match the manifold dimension or the pole count")
    if tag in ("ch_lower", "sphere_lower") and not (2 <= params.p < params.N):
        raise ValueError("lower-bound potentials need 2 <= p < N")


def _cfg(cfg: QuadConfig | None, q: float, **kw) -> QuadConfig:
    cfg = cfg or QuadConfig()
    if cfg.importance_exponent is None:
        cfg = cfg.with_(importance_exponent=q)
    return cfg.with_(**kw) if kw else cfg


def _ratio(a: float, b: float) -> float:
    return a / b if b != 0 else (np.inf if a > 0 else np.nan)


# ---------------------------------------------------------------------------
# Rayleigh quotients and inequality checks
# ---------------------------------------------------------------------------


def rayleigh(
    M: ModelManifold,
    poles: PoleSet,
    params: HardyParams,
    u: ScalarField,
    potential_tag: str = "full",
    cfg: QuadConfig | None = None,
) -> RayleighReport:
    """``I = int |grad u|^p``, ``J = int V |u|^p`` and the margin ``I - J``."""
    _check_params(M, poles, params, potential_tag)
    V = potential_function(M, poles, params, potential_tag)
    p = params.p

    def integrand(x):
        uval = u.evaluate(x)
        on = uval != 0
        I = np.zeros(len(x))
        J = np.zeros(len(x))
        if np.any(on):
            g = _on_subset(u.gradient, x, on)
            I[on] = M.metric_norm(x[on], g) ** p
            J[on] = _on_subset(V, x, on) * np.abs(uval[on]) ** p
        return {"I": I, "J": J, "margin": I - J}

    est = integrate(M, integrand, u.support, poles, _cfg(cfg, p))
    return RayleighReport(
        est["I"], est["J"], est["margin"], _ratio(est["I"].value, est["J"].value), potential_tag, params
    )


def check_inequality(
    M: ModelManifold,
    poles: PoleSet,
    params: HardyParams,
    fields: list[ScalarField],
    potential_tag: str = "full",
    cfg: QuadConfig | None = None,
):
    """Margins ``I - J`` for each field; a field passes when ``margin >= -3 sigma``.

    Returns the list of ``(index, margin, passed, report)`` tuples and the
    pass rate.
    """
    rows = []
    for k, u in enumerate(fields):
        rep = rayleigh(M, poles, params, u, potential_tag, cfg)
        rows.append((k, rep.margin.value, rep.passed, rep))
    rate = float(np.mean([r[2] for r in rows])) if rows else 1.0
    return rows, rate


# ---------------------------------------------------------------------------
# extremal equality
# ---------------------------------------------------------------------------


def _sphere_flux(M, phi: ScalarField, p: float, center, radius: float, cfg: QuadConfig):
    """``int_{S_radius(center)} phi |grad phi|^(p-2) g(grad phi, nu)`` by antithetic direction sampling."""
    m = max(cfg.total_samples // 20, 2048) // 2
    rng = np.random.default_rng(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(999, 0, 0)))
    theta = M.random_directions(center, rng, m)
    theta = np.concatenate([theta, -theta])
    x = M.polar_point(center, np.full(2 * m, radius), theta)
    nu = M.grad_distance(center, x)
    g = phi.gradient(x)
    gn = M.metric_norm(x, g)
    vals = phi.evaluate(x) * gn ** (p - 2) * M.metric_inner(x, g, nu)
    area = sphere_area(M.dim - 1) * float(s_func(M.curvature, radius)) ** (M.dim - 1)
    pair = 0.5 * (vals[:m] + vals[m:]) * area
    se = float(pair.std(ddof=1) / np.sqrt(m))
    return QuadratureEstimate(float(pair.mean()), se, 2 * m, cfg.seed, [])


def minimizer_equality(
    M: ModelManifold,
    poles: PoleSet,
    params: HardyParams,
    cfg: QuadConfig | None = None,
) -> EqualityReport:
    """Relative gap ``|I - J| / J`` for the two-pole extremal ``(d_1 d_2)^gamma``.

    On flat space the integrals run over the whole space (with an exterior
    tail stratum).  On the hyperbolic model the chart is truncated at
    ``cfg.truncation`` and the boundary flux
    ``int_{S_D} phi |grad phi|^(p-2) d_nu phi`` over the truncation sphere is
    reported as a diagnostic: the divergence theorem gives
    ``I - J = flux`` on the truncated ball.
    """
    if isinstance(M, SphereCap):
        raise ValueError("the extremal equality is stated on Cartan-Hadamard models only")
    _check_params(M, poles, params)
    phi = phi_minimizer(M, poles, params)
    p, N = params.p, params.N
    gamma = minimizer_exponent(p, N)
    q = p * (1.0 - gamma)
    extra = {}
    if cfg is None or cfg.pole_ball_radius is None:
        # the d^(-q) singularity is strong enough that the flat bulk sampler
        # needs the pole balls as wide as the separation allows
        extra["pole_ball_radius"] = 0.45 * poles.min_separation
    if isinstance(M, Euclidean):
        extra["tail_exponent"] = p * (1.0 - 2.0 * gamma)
    cfg = _cfg(cfg, q, **extra)

    def integrand(x):
        f = pole_frame(M, poles, x)
        val = phi.evaluate(x)
        g = phi.gradient(x)
        I = M.metric_norm(x, g) ** p
        J = V_bipolar(M, poles, params, x, frame=f) * val**p
        return {"I": I, "J": J, "difference": I - J}

    est = integrate(M, integrand, WholeChart(), poles, cfg)
    I, J, D = est["I"], est["J"], est["difference"]
    gap = abs(D.value) / J.value
    rel = float(D.std_error / J.value)
    tol = max(EQUALITY_TOL, EQUALITY_SIGMAS * rel)
    flux, radius, notes = None, None, ""
    if isinstance(M, Hyperbolic):
        radius = float(M.geodesic_radius_of(cfg.truncation))
        flux = _sphere_flux(M, phi, p, M.origin, radius, cfg)
        closure = (D.value - flux.value) / J.value
        notes = (
            f"chart truncated at |x| = {cfg.truncation}; boundary flux {flux.value:.6g}; "
            f"(I - J - flux)/J = {closure:.3g}"
        )
    return EqualityReport(I, J, D, float(gap), rel, tol, bool(gap <= tol), flux, radius, notes)


# ---------------------------------------------------------------------------
# sharpness sweep
# ---------------------------------------------------------------------------


def sharpness_sweep(
    M: ModelManifold,
    poles: PoleSet,
    params: HardyParams,
    eps_list,
    cfg: QuadConfig | None = None,
) -> list[SweepRow]:
    """Quotients of the sharpness sequence ``u_eps``.

    ``I = int |grad u|^p``, ``J = int (d_1^-2 + d_2^-2) |v|^(p-2) |u|^p`` and
    ``K = int G_12/(d_1 d_2) |v|^(p-2) |u|^p``, so that ``J - 2K`` is the
    integral of ``V_tilde |u|^p`` and ``ratio = I / (J - 2K)`` should decrease
    towards ``C1``.
    """
    if isinstance(M, SphereCap):
        raise ValueError("the sharpness sweep runs on Cartan-Hadamard models")
    _check_params(M, poles, params)
    if poles.n != 2:
        raise ValueError("the sharpness sweep needs two poles")
    if not (2 <= params.p < params.N):
        raise ValueError("the sharpness sweep needs 2 <= p < N")
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    p = params.p
    gamma = minimizer_exponent(p, params.N)
    # |grad u|^p ~ d^(p(gamma-1)) times a slowly varying log weight
    q = p * (1.0 - gamma)
    rows = []
    for eps in eps_list:
        u = u_epsilon(M, poles, params, eps)

        def integrand(x, u=u):
            uval = u.evaluate(x)
            on = uval != 0
            out = {k: np.zeros(len(x)) for k in ("I", "J", "K", "tilde")}
            if not np.any(on):
                return out
            xs = x[on]
            f = _on_subset(lambda y: pole_frame(M, poles, y), x, on)
            g = u.gradient(xs)
            d1, d2 = f.d[..., 0], f.d[..., 1]
            G12 = M.metric_inner(xs, f.grads[..., 0, :], f.grads[..., 1, :])
            vn2 = 1 / d1**2 + 1 / d2**2 + 2 * G12 / (d1 * d2)
            pm2, _ = _on_subset(lambda y: _v_powers(vn2, p, False), x, on)
            up = np.abs(uval[on]) ** p * pm2
            out["I"][on] = M.metric_norm(xs, g) ** p
            out["J"][on] = (1 / d1**2 + 1 / d2**2) * up
            out["K"][on] = G12 / (d1 * d2) * up
            out["tilde"][on] = out["J"][on] - 2 * out["K"][on]
            return out

        est = integrate(M, integrand, u.support, poles, _cfg(cfg, q))
        I, J, K, T = est["I"], est["J"], est["K"], est["tilde"]
        ratio = _ratio(I.value, T.value)
        rse = abs(ratio) * float(np.hypot(I.rel_error, T.rel_error))
        rows.append(SweepRow(eps, I.value, J.value, K.value, ratio, (I.std_error, J.std_error, K.std_error), rse))
    return rows


def sweep_checks(rows: list[SweepRow], target: float) -> dict:
    """Trend checks on a sweep table ordered by decreasing eps."""
    r = np.array([row.ratio for row in rows])
    K = np.abs([row.K for row in rows])
    J = np.array([row.J for row in rows])
    first, last = r[0] - target, r[-1] - target
    return {
        "ratio_decreasing": bool(np.all(np.diff(r) < 0)),
        "above_target": bool(np.all(r > target)),
        "gap_halved": bool(last <= 0.5 * first),
        "K_decreasing": bool(np.all(np.diff(K) < 0)),
        "J_increasing": bool(np.all(np.diff(J) > 0)),
        "initial_gap": float(first),
        "final_gap": float(last),
    }


# ---------------------------------------------------------------------------
# sign audit
# ---------------------------------------------------------------------------


def audit_points(M: ModelManifold, poles: PoleSet, rng, m: int):
    """Seeded points spread over a chart region containing the poles, half of them close to a pole."""
    P = poles.poles
    if isinstance(M, Hyperbolic):
        center, radius = M.origin, float(M.geodesic_radius_of(0.9))
    elif isinstance(M, SphereCap):
        center, radius = M.origin, np.pi / 2 - 0.05
    else:
        center = P.mean(axis=0)
        radius = 2.0 * float(np.max(np.linalg.norm(P - center, axis=-1))) + 1.0
    m_far = m - m // 2
    r = radius * rng.random(m_far) ** (1.0 / M.dim)
    far = M.polar_point(center, r, M.random_directions(center, rng, m_far))
    which = rng.integers(0, len(P), m // 2)
    near = np.empty((m // 2, P.shape[1]))
    scale = 0.5 * poles.min_separation
    if isinstance(M, SphereCap):
        scale = min(scale, float(np.min(np.pi / 2 - M.distance(M.origin, P))))
    rad = scale * 10.0 ** (-4 * rng.random(m // 2))
    for i in range(len(P)):
        sel = which == i
        k = int(sel.sum())
        if k:
            near[sel] = M.polar_point(P[i], rad[sel], M.random_directions(P[i], rng, k))
    return np.concatenate([far, near])


def positivity_audit(
    M: ModelManifold,
    poles: PoleSet,
    params: HardyParams,
    sample_count: int = 10_000,
    seed: int = 0,
) -> AuditReport:
    """Pointwise sign statistics of the four groups of the general potential.

    A sign (relative ``min >= -1e-10``) is asserted for the leading,
    Laplacian and Hessian groups and for the total, only
    on Cartan-Hadamard models with two poles and ``2 <= p < N``; otherwise the
    statistics are informational.
    """
    _check_params(M, poles, params)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    x = audit_points(M, poles, rng, sample_count)
    keep = np.ones(len(x), dtype=bool)
    for _ in range(5):
        try:
            grp = V_multipolar(M, poles, params, x[keep], groups=True)
            break
        except PointError as err:
            if err.mask is None:
                raise
            keep[np.flatnonzero(keep)[np.asarray(err.mask)]] = False
    else:
        raise RuntimeError("could not evaluate the potential on the audit points")
    grp = dict(grp)
    grp["total"] = sum(grp[k] for k in ("leading", "laplacian", "gram", "hessian"))
    stats = {}
    for k, v in grp.items():
        scale = np.maximum(np.abs(grp["leading"]) + np.abs(grp["laplacian"]), 1.0)
        stats[k] = {
            "min": float(np.min(v)),
            "min_relative": float(np.min(v / scale)),
            "fraction_negative": float(np.mean(v < -1e-10 * scale)),
        }
    asserted = (
        isinstance(M, (Euclidean, Hyperbolic)) and poles.n == 2 and 2 <= params.p < params.N
    )
    passed = True
    if asserted:
        # the gram group carries the factor -(p - 2) and is non-positive by design
        passed = all(stats[k]["min_relative"] >= -1e-10 for k in SIGNED_GROUPS)
    return AuditReport(stats, int(keep.sum()), int((~keep).sum()), asserted, passed)


# ---------------------------------------------------------------------------
# weak supersolution identity
# ---------------------------------------------------------------------------


def weak_supersolution_residual(
    M: ModelManifold,
    poles: PoleSet,
    params: HardyParams,
    test_fields: list[ScalarField],
    cfg: QuadConfig | None = None,
) -> list[ResidualReport]:
    """Weak form of ``-Delta_p phi = V phi^(p-1)`` for ``phi = prod d_i^beta``.

    For each nonnegative test field ``u`` compares
    ``int |grad phi|^(p-2) g(grad phi, grad u)`` with ``int V phi^(p-1) u``.
    """
    _check_params(M, poles, params)
    phi = phi_power_product(M, poles, params.beta)
    p, N, n = params.p, params.N, params.n
    q = p + (N - p) / n
    V = potential_function(M, poles, params, "full")
    out = []
    for u in test_fields:

        def integrand(x, u=u):
            uval = u.evaluate(x)
            on = uval != 0
            L = np.zeros(len(x))
            R = np.zeros(len(x))
            if np.any(on):
                xs = x[on]
                gphi = _on_subset(phi.gradient, x, on)
                gu = u.gradient(xs)
                L[on] = M.metric_norm(xs, gphi) ** (p - 2) * M.metric_inner(xs, gphi, gu)
                R[on] = _on_subset(V, x, on) * _on_subset(phi.evaluate, x, on) ** (p - 1) * uval[on]
            return {"lhs": L, "rhs": R, "difference": L - R}

        est = integrate(M, integrand, u.support, poles, _cfg(cfg, q))
        L, R, D = est["lhs"], est["rhs"], est["difference"]
        res = abs(D.value) / abs(R.value)
        rel = float(D.std_error / abs(R.value))
        tol = max(EQUALITY_TOL, EQUALITY_SIGMAS * rel)
        out.append(ResidualReport(L, R, D, float(res), rel, tol, bool(res <= tol)))
    return out


# ---------------------------------------------------------------------------
# pointwise checks
# ---------------------------------------------------------------------------


def _rel_dev(a, b):
    return np.abs(a - b) / np.maximum(np.abs(b), 1e-300)


def _drop_bad(fn, x, tries: int = 5):
    """Evaluate ``fn`` on ``x``, discarding points flagged by point errors."""
    keep = np.ones(len(x), dtype=bool)
    for _ in range(tries):
        try:
            return fn(x[keep]), keep
        except PointError as err:
            if err.mask is None:
                raise
            keep[np.flatnonzero(keep)[np.asarray(err.mask)]] = False
    raise RuntimeError("too many singular points in the check sample")


def reduction_check(N: int, poles, p: float, count: int = 1000, seed: int = 0) -> dict:
    """Flat-space reductions of the general potential to the closed-form oracles.

    For ``p = 2`` the n-pole potential is compared with
    ``(N-2)^2/n^2 sum |a_i-a_j|^2/(d_i^2 d_j^2)``; for two poles and
    ``2 <= p < N`` the two-pole potential is compared with the midpoint form,
    together with the bridge identity ``|v| d_1 d_2 = 2 |x - a|``.
    """
    M = Euclidean(N)
    P = PoleSet(M, np.asarray(poles, dtype=float))
    params = make_params(p, N, P.n)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    x = audit_points(M, P, rng, count)
    out = {}
    if p == 2:
        (pair, keep) = _drop_bad(
            lambda y: (V_multipolar(M, P, params, y), V_euclid_multipolar_p2(P, N, y)), x
        )
        out["multipolar_p2"] = float(np.max(_rel_dev(*pair)))
    if P.n == 2:
        if not 2 <= p < N:
            raise ValueError("the two-pole flat oracle needs 2 <= p < N")
        a1, a2 = P.poles
        (pair, keep) = _drop_bad(
            lambda y: (V_bipolar(M, P, params, y), V_euclid_bipolar_lp(a1, a2, N, p, y)), x
        )
        out["bipolar_lp"] = float(np.max(_rel_dev(*pair)))
        y = x[keep]
        f = pole_frame(M, P, y)
        lhs = np.sqrt(np.maximum(v_norm_sq(M, P, y, f), 0.0)) * f.d[:, 0] * f.d[:, 1]
        rhs = 2.0 * np.linalg.norm(y - 0.5 * (a1 + a2), axis=-1)
        out["bridge"] = float(np.max(_rel_dev(lhs, rhs)))
    out["points"] = int(count)
    return out


def orthonormal_frame(M: ModelManifold, x):
    """Metric-orthonormal tangent frames ``(m, N, ambient)`` at a batch of points."""
    x = np.atleast_2d(x)
    m = x.shape[0]
    if isinstance(M, SphereCap):
        # project the first N ambient axes to the tangent space and orthonormalise;
        # they stay independent on the open upper hemisphere
        proj = np.eye(M.dim + 1)[None] - x[:, :, None] * x[:, None, :]
        Q, _ = np.linalg.qr(proj[:, :, : M.dim])
        return np.swapaxes(Q, 1, 2)
    E = np.broadcast_to(np.eye(M.dim), (m, M.dim, M.dim)).copy()
    if isinstance(M, Hyperbolic):
        E /= M.conformal_factor(x)[:, None, None]
    return E


def _second_difference(M, f, x, X, h):
    """Richardson-extrapolated ``d^2/dt^2 f(exp_x(tX))`` at ``t = 0``."""

    def central(k):
        return (f(M.exp(x, k * X)) - 2.0 * f(x) + f(M.exp(x, -k * X))) / k**2

    return (4.0 * central(0.5 * h) - central(h)) / 3.0


def eikonal_check(M: ModelManifold, count: int = 500, fd_count: int = 100, seed: int = 0, h: float = 2e-3) -> dict:
    """Eikonal property of distance and comparison equalities by finite differences.

    Second derivatives are taken along geodesics, ``Hess f(X, X) =
    d^2/dt^2 f(exp_x(tX))``, and the Laplacian is the trace over a metric
    orthonormal frame.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    anchor = symmetric_poles(M, 0.5) if not isinstance(M, Euclidean) else PoleSet(M, np.eye(M.dim)[:2])

    def pairs(m):
        a = audit_points(M, anchor, rng, 2 * m)
        rng.shuffle(a)
        a, x = a[:m], a[m:]
        d = M.distance(a, x)
        ok = d > 0.2
        if isinstance(M, SphereCap):
            ok &= d < np.pi - 0.3  # keep clear of the conjugate point
        return a[ok], x[ok]

    a, x = pairs(count)
    g = M.grad_distance(a, x)
    norm_dev = float(np.max(np.abs(M.metric_norm(x, g) - 1.0)))

    a, x = pairs(fd_count)
    grad_dev = 0.0
    lap_dev = 0.0
    hess_dev = 0.0
    for ai, xi in zip(a, x):
        f = lambda y, ai=ai: M.distance(ai, y)  # noqa: E731
        gfd = fd_gradient(M, f, xi[None])[0]
        grad_dev = max(grad_dev, float(np.max(np.abs(gfd - M.grad_distance(ai, xi)))))
        E = orthonormal_frame(M, xi[None])[0]
        hx = h * min(1.0, float(M.distance(ai, xi)))
        second = np.array([_second_difference(M, f, xi, e, hx) for e in E])
        lap_dev = max(lap_dev, abs(float(second.sum()) - float(laplacian_distance(M, ai, xi))))
        X = E.T @ rng.standard_normal(M.dim)
        hess_fd = _second_difference(M, f, xi, X, hx)
        hess_dev = max(hess_dev, abs(float(hess_fd) - float(hessian_distance_form(M, ai, xi, X))))
    return {
        "gradient_norm": norm_dev,
        "gradient_fd": grad_dev,
        "laplacian_fd": lap_dev,
        "hessian_fd": hess_dev,
        "points": int(len(a)),
    }


def domination_check(M: ModelManifold, params: HardyParams, poles: PoleSet, count: int = 1000, seed: int = 0) -> float:
    """Smallest ``(V_bipolar - V_lower) / max(1, |V_bipolar|)`` over seeded points."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    x = audit_points(M, poles, rng, count)
    tag = "ch_lower" if isinstance(M, Hyperbolic) else "sphere_lower"
    low = potential_function(M, poles, params, tag)
    (pair, _) = _drop_bad(lambda y: (V_bipolar(M, poles, params, y), low(y)), x)
    Vb, Vl = pair
    return float(np.min((Vb - Vl) / np.maximum(np.abs(Vb), 1.0)))


def scalar_bounds_check(grid: int = 10_000, deltas=(0.1, 0.5, 1.0), K: int = 10_000) -> dict:
    """Grid scans of the three scalar inequalities used by the curvature bounds."""
    t = np.geomspace(1e-3, 1e3, grid)
    out = {"coth_gap_min": float(np.min(coth_gap_bound(t)))}
    worst = np.inf
    for delta in deltas:
        top = delta + np.pi / 2
        d = np.linspace(top / grid, top, grid, endpoint=False)
        lhs = (d / np.tan(d) - 1.0) / d**2
        worst = min(worst, float(np.min(lhs - 0.5 * c_delta(delta))))
    out["c_delta_margin_min"] = worst
    tt = np.linspace(0.1, 3.0, 1000)
    out["mittag_leffler_max_error"] = float(np.max(np.abs(cot_mittag_leffler(tt, K) - 1.0 / np.tan(tt))))
    return out


# ---------------------------------------------------------------------------
# default configurations
# ---------------------------------------------------------------------------


def symmetric_poles(M: ModelManifold, half_distance: float) -> PoleSet:
    """Two poles at geodesic distance ``half_distance`` from the chart origin along the first axis."""
    e = np.zeros(M.dim)
    e[0] = 1.0
    if isinstance(M, SphereCap):
        return PoleSet(M, np.stack([M.point_at(half_distance, e), M.point_at(half_distance, -e)]))
    if isinstance(M, Hyperbolic):
        t = float(M.chart_radius_of(half_distance))
    else:
        t = half_distance
    return PoleSet(M, np.stack([t * e, -t * e]))


def default_bumps(M: ModelManifold, poles: PoleSet, seed: int, count: int) -> list[ScalarField]:
    """Seeded bumps placed on a ball around the pole configuration, so supports typically cover a pole."""
    if isinstance(M, SphereCap):
        spread = float(np.max(M.distance(M.origin, poles.poles)))
        placement = Ball(M.origin, min(spread + 0.2, np.pi / 2 - 0.2))
    else:
        center = M.origin if isinstance(M, Hyperbolic) else poles.poles.mean(axis=0)
        spread = float(np.max(M.distance(center, poles.poles)))
        placement = Ball(center, 1.5 * spread)
    return bump_family(M, seed, count, placement)


__all__ = [
    "AuditReport",
    "EqualityReport",
    "RayleighReport",
    "ResidualReport",
    "SweepRow",
    "POTENTIAL_TAGS",
    "audit_points",
    "check_inequality",
    "domination_check",
    "eikonal_check",
    "orthonormal_frame",
    "reduction_check",
    "scalar_bounds_check",
    "default_bumps",
    "minimizer_equality",
    "positivity_audit",
    "potential_function",
    "rayleigh",
    "sharpness_sweep",
    "sweep_checks",
    "symmetric_poles",
    "weak_supersolution_residual",
]
