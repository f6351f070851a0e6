"""Test functions for the Rayleigh quotients.

A :class:`ScalarField` bundles a vectorised value map, its Riemannian
gradient (closed form where we have one) and a description of its support,
which the quadrature uses to build its strata.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import (
    POLE_CUTOFF,
    Hyperbolic,
    ModelManifold,
    PoleSet,
    SphereCap,
    pole_frame,
    v_field,
)
from .potentials import HardyParams

# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WholeChart:
    pass


@dataclass(frozen=True)
class Annulus:
    """Closed geodesic annulus ``{r <= d(center, x) <= R}``; ``r = 0`` is a ball."""

    center: np.ndarray = field(compare=False)
    r: float
    R: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if not (0 <= self.r < self.R):
            raise ValueError(f"annulus radii must satisfy 0 <= r < R, got {self.r}, {self.R}")


def Ball(center, radius: float) -> Annulus:
    return Annulus(center, 0.0, radius)


@dataclass(frozen=True)
class UnionOf:
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))


RegionSpec = WholeChart | Annulus | UnionOf


def region_parts(region) -> list:
    """Flatten a region into a list of annuli, or ``[WholeChart()]``."""
    if isinstance(region, WholeChart):
        return [region]
    if isinstance(region, Annulus):
        return [region]
    out = []
    for part in region.parts:
        out.extend(region_parts(part))
    if any(isinstance(p, WholeChart) for p in out):
        return [WholeChart()]
    return out


def region_contains(M: ModelManifold, region, x):
    x = np.asarray(x, dtype=float)
    inside = np.zeros(x.shape[:-1], dtype=bool)
    for part in region_parts(region):
        if isinstance(part, WholeChart):
            return np.ones(x.shape[:-1], dtype=bool)
        d = M.distance(part.center, x)
        inside |= (d >= part.r) & (d <= part.R)
    return inside


# ---------------------------------------------------------------------------
# scalar fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ScalarField:
    manifold: ModelManifold
    evaluate: Callable
    gradient: Callable
    support: object = WholeChart()
    smoothness_note: str = ""

    def __call__(self, x):
        return self.evaluate(x)

    def scaled(self, lam: float) -> "ScalarField":
        ev, gr = self.evaluate, self.gradient
        return ScalarField(
            self.manifold,
            lambda x: lam * ev(x),
            lambda x: lam * gr(x),
            self.support,
            self.smoothness_note,
        )


def phi_power_product(M: ModelManifold, poles: PoleSet, beta: float) -> ScalarField:
    """``prod_i d_i^beta`` with gradient ``beta * phi * v``."""
    if not beta < 0:
        raise ValueError("beta must be negative")

    def evaluate(x):
        f = pole_frame(M, poles, x)
        return np.exp(beta * np.sum(np.log(f.d), axis=-1))

    def gradient(x):
        f = pole_frame(M, poles, x)
        phi = np.exp(beta * np.sum(np.log(f.d), axis=-1))
        return (beta * phi)[..., None] * v_field(M, poles, x, f)

    return ScalarField(M, evaluate, gradient, WholeChart(), "smooth off the poles, singular at them")


def phi_minimizer(M: ModelManifold, poles: PoleSet, params: HardyParams) -> ScalarField:
    """Two-pole extremal ``(d_1 d_2)^((p-N)/(2(p-1)))``."""
    if poles.n != 2:
        raise ValueError("the minimiser is defined for two poles")
    if not (2 < params.p < params.N):
        raise ValueError("the minimiser is attained only for 2 < p < N")
    return phi_power_product(M, poles, minimizer_exponent(params.p, params.N))


def minimizer_exponent(p: float, N: int) -> float:
    return (p - N) / (2 * (p - 1))


def u_epsilon(M: ModelManifold, poles: PoleSet, params: HardyParams, eps: float) -> ScalarField:
    """Log-weighted power profiles on the annuli ``[eps^2, sqrt(eps)]`` around both poles.

    Around each pole the profile is ``f(d) d^gamma`` with
    ``gamma = (p-N)/(2(p-1))``, ``f = log(d/eps^2)/log(1/eps)`` on
    ``[eps^2, eps]`` and ``f = 2 log(sqrt(eps)/d)/log(1/eps)`` on
    ``[eps, sqrt(eps)]``.  The two profiles have disjoint supports and are
    summed.
    """
    if poles.n != 2:
        raise ValueError("u_epsilon is defined for two poles")
    if not (0 < eps < 1):
        raise ValueError("need 0 < eps < 1")
    if not poles.pairwise_distances[0, 1] > 4 * np.sqrt(eps):
        raise ValueError("eps too large: the balls of radius 2 sqrt(eps) around the poles overlap")
    gamma = minimizer_exponent(params.p, params.N)
    L = np.log(1.0 / eps)
    lo, mid, hi = eps**2, eps, np.sqrt(eps)
    P = poles.poles

    def profile(d):
        f = np.zeros_like(d)
        df = np.zeros_like(d)
        inner = (d >= lo) & (d <= mid)
        outer = (d > mid) & (d <= hi)
        f[inner] = np.log(d[inner] / lo) / L
        df[inner] = 1.0 / (L * d[inner])
        f[outer] = 2.0 * np.log(hi / d[outer]) / L
        df[outer] = -2.0 / (L * d[outer])
        return f, df

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        d = M.distance(P, x[..., None, :])
        f, _ = profile(d)
        with np.errstate(divide="ignore"):
            power = np.where(f != 0, np.maximum(d, POLE_CUTOFF) ** gamma, 0.0)
        return np.sum(f * power, axis=-1)

    def gradient(x):
        x = np.asarray(x, dtype=float)
        d = M.distance(P, x[..., None, :])
        f, df = profile(d)
        out = np.zeros(x.shape)
        for i in range(2):
            on = f[..., i] != 0
            if not np.any(on):
                continue
            di = d[..., i][on]
            coef = df[..., i][on] * di**gamma + f[..., i][on] * gamma * di ** (gamma - 1)
            g = M.grad_distance(P[i], x[on])
            out[on] += coef[:, None] * g
        return out

    support = UnionOf(tuple(Annulus(P[i], lo, hi) for i in range(2)))
    return ScalarField(M, evaluate, gradient, support, "Lipschitz; kink on the sphere d_i = eps")


def _chart_limit(M: ModelManifold, margin: float) -> float:
    """Largest geodesic distance from the chart origin a bump may reach."""
    if isinstance(M, Hyperbolic):
        return float(M.geodesic_radius_of(1.0 - margin))
    if isinstance(M, SphereCap):
        return np.pi / 2 - margin
    return np.inf


def bump(M: ModelManifold, center, radius: float, weight: float = 1.0) -> ScalarField:
    """Mollifier ``weight * exp(-1/(1 - (d/radius)^2))`` on the geodesic ball ``B_radius(center)``."""
    center = np.asarray(center, dtype=float)
    return bump_sum(M, [center], [radius], [weight])


def bump_sum(M: ModelManifold, centers, radii, weights) -> ScalarField:
    C = np.atleast_2d(np.asarray(centers, dtype=float))
    rho = np.asarray(radii, dtype=float)
    w = np.asarray(weights, dtype=float)

    def _parts(x):
        d = M.distance(C, x[..., None, :])
        t2 = (d / rho) ** 2
        inside = t2 < 1.0
        with np.errstate(divide="ignore", over="ignore"):
            b = np.where(inside, np.exp(-1.0 / np.where(inside, 1.0 - t2, 1.0)), 0.0)
        return t2, inside, b

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        _, _, b = _parts(x)
        return b @ w

    def gradient(x):
        x = np.asarray(x, dtype=float)
        t2, inside, b = _parts(x)
        out = np.zeros(x.shape)
        for k in range(len(w)):
            on = inside[..., k]
            if not np.any(on):
                continue
            coef = -w[k] * b[..., k][on] * 2.0 / (rho[k] ** 2 * (1.0 - t2[..., k][on]) ** 2)
            out[on] += coef[:, None] * M.log_radial(C[k], x[on])
        return out

    support = UnionOf(tuple(Ball(C[k], rho[k]) for k in range(len(w))))
    return ScalarField(M, evaluate, gradient, support, "C-infinity, compact support")


def bump_family(
    M: ModelManifold,
    seed: int,
    count: int,
    placement: Annulus,
    radius_range: tuple[float, float] = (0.3, 1.0),
    max_bumps: int = 4,
    margin: float = 0.05,
) -> list[ScalarField]:
    """Seeded random sums of 1 to ``max_bumps`` mollifier bumps.

    Bump centres are drawn uniformly (in geodesic polar radius and direction)
    from the ``placement`` ball; radii are ``radius_range`` times the
    placement radius, clipped so every support stays ``margin`` inside the
    chart.  Weights are drawn from ``[0.5, 1.5]``.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if not isinstance(placement, Annulus):
        raise ValueError("placement must be a geodesic ball or annulus")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    limit = _chart_limit(M, margin)
    origin = M.origin
    lo, hi = radius_range
    fields = []
    for _ in range(count):
        k = int(rng.integers(1, max_bumps + 1))
        centers, radii = [], []
        for _ in range(k):
            r = placement.r + (placement.R - placement.r) * rng.random()
            u = M.random_directions(placement.center, rng, 1)
            c = M.polar_point(placement.center, r, u)[0]
            room = limit - float(M.distance(origin, c))
            rad = placement.R * (lo + (hi - lo) * rng.random())
            rad = min(rad, room)
            if rad <= 1e-3:
                raise ValueError("bump placement infeasible: placement region reaches the chart boundary")
            centers.append(c)
            radii.append(rad)
        weights = 0.5 + rng.random(k)
        fields.append(bump_sum(M, centers, radii, weights))
    return fields


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------


def _inside(M: ModelManifold, y):
    if isinstance(M, Hyperbolic):
        return np.sum(y * y, axis=-1) < 1.0
    if isinstance(M, SphereCap):
        return y[..., -1] > 0.0
    return np.ones(y.shape[:-1], dtype=bool)


def fd_gradient(M: ModelManifold, field: ScalarField | Callable, x, h=None, full_output=False):
    """Central-difference Riemannian gradient.

    On the sphere cap the function is extended as ``F(y) = f(y/|y|)`` and
    differentiated in ambient coordinates, which yields the tangential
    gradient directly.  Where a stencil leaves the chart a one-sided
    difference is used and the point is flagged; with ``full_output`` the
    flag array is returned alongside the gradient.
    """
    f = field.evaluate if isinstance(field, ScalarField) else field
    x = np.asarray(x, dtype=float)
    if h is None:
        h = 1e-5 * np.maximum(1.0, np.sqrt(np.sum(x * x, axis=-1)))
    h = np.broadcast_to(np.asarray(h, dtype=float), x.shape[:-1])
    sphere = isinstance(M, SphereCap)

    def F(y):
        if sphere:
            y = y / np.sqrt(np.sum(y * y, axis=-1))[..., None]
        return f(y)

    f0 = None
    grad = np.zeros(x.shape)
    flagged = np.zeros(x.shape[:-1], dtype=bool)
    for i in range(x.shape[-1]):
        step = np.zeros(x.shape)
        step[..., i] = h
        xp, xm = x + step, x - step
        okp = _inside(M, xp / np.linalg.norm(xp, axis=-1, keepdims=True) if sphere else xp)
        okm = _inside(M, xm / np.linalg.norm(xm, axis=-1, keepdims=True) if sphere else xm)
        both = okp & okm
        fp = np.where(okp, F(np.where(okp[..., None], xp, x)), np.nan)
        fm = np.where(okm, F(np.where(okm[..., None], xm, x)), np.nan)
        gi = (fp - fm) / (2 * h)
        if not np.all(both):
            if f0 is None:
                f0 = f(x)
            gi = np.where(okp & ~okm, (fp - f0) / h, gi)
            gi = np.where(okm & ~okp, (f0 - fm) / h, gi)
            flagged |= ~both
        grad[..., i] = gi
    if isinstance(M, Hyperbolic):
        grad = grad / M.conformal_factor(x)[..., None] ** 2
    if sphere:
        grad = grad - np.sum(grad * x, axis=-1)[..., None] * x
    if full_output:
        return grad, flagged
    return grad


__all__ = [
    "WholeChart",
    "Annulus",
    "Ball",
    "UnionOf",
    "RegionSpec",
    "region_parts",
    "region_contains",
    "ScalarField",
    "phi_power_product",
    "phi_minimizer",
    "minimizer_exponent",
    "u_epsilon",
    "bump",
    "bump_sum",
    "bump_family",
    "fd_gradient",
]

