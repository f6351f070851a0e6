"""Distance-function geometry on the three constant-curvature model spaces.

Points are plain ``numpy`` arrays whose last axis holds chart coordinates
(length ``N`` for the flat and Poincare-ball charts, ``N + 1`` ambient
coordinates for the sphere cap).  Every routine broadcasts over leading
axes, so a batch of points has shape ``(m, dim)``.  Tangent vectors use the
same coordinates as their base point.

In constant curvature ``c`` the Hessian and Laplacian comparison theorems
hold with equality, which gives the closed forms used here::

    Hess d (X, Y) = s_ratio(c, d) * (<X, Y> - <X, grad d><Y, grad d>)
    Lap d         = (N - 1) * s_ratio(c, d)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np
from scipy.special import gammaln

# d(x, a) below this counts as hitting the pole a.
POLE_CUTOFF = 1e-9
_SERIES_CUTOFF = 1e-8


class DomainError(ValueError):
    """A point or tangent vector lies outside the chart of its model."""


class PointError(ValueError):
    """Base for pointwise evaluation failures.

    ``mask`` flags the offending entries of a batched evaluation so that a
    sampler can redraw exactly those points.
    """

    def __init__(self, message, mask=None):
        super().__init__(message)
        self.mask = None if mask is None else np.asarray(mask, dtype=bool)


class SingularPointError(PointError):
    """Evaluation at (or within ``POLE_CUTOFF`` of) a pole."""


class DegeneratePointError(PointError):
    """Evaluation where ``|v|`` vanishes and a negative power of it is needed."""


def _dot(u, v):
    return np.sum(u * v, axis=-1)


def _norm(u):
    return np.sqrt(_dot(u, u))


def sphere_area(k: int) -> float:
    """Area of the unit sphere S^k in R^{k+1}."""
    return float(2.0 * np.exp(0.5 * (k + 1) * np.log(np.pi) - gammaln(0.5 * (k + 1))))


def s_func(c: float, r):
    """The comparison profile s_c(r): r, sin(r sqrt c)/sqrt c or sinh(r sqrt -c)/sqrt -c."""
    r = np.asarray(r, dtype=float)
    if c == 0.0:
        return r.copy()
    k = np.sqrt(abs(c))
    if c > 0:
        return np.sin(k * r) / k
    return np.sinh(k * r) / k


def s_ratio(c: float, r):
    """Logarithmic derivative s_c'(r) / s_c(r).

    Equal to ``1/r``, ``sqrt(-c) coth(r sqrt(-c))`` or ``sqrt(c) cot(r sqrt(c))``
    for zero, negative and positive curvature.  When ``|c| r^2`` is tiny the
    two-term series ``1/r - c r / 3`` is used so the value is continuous in
    ``c`` at zero.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("s_ratio needs r > 0")
    if c > 0 and np.any(r * np.sqrt(c) >= np.pi):
        raise ValueError("s_ratio: r*sqrt(c) must stay below pi for c > 0")
    if c == 0.0:
        return 1.0 / r
    k = np.sqrt(abs(c))
    t = k * r
    main = k / (np.tan(t) if c > 0 else np.tanh(t))
    return np.where(abs(c) * r * r < _SERIES_CUTOFF, 1.0 / r - c * r / 3.0, main)


def rs_ratio_minus_one(c: float, r):
    """``r * s_ratio(c, r) - 1`` without cancellation for small ``|c| r^2``.

    This is ``t coth t - 1`` (c < 0) or ``t cot t - 1`` (c > 0) with
    ``t = r sqrt|c|``; it vanishes identically in flat space.
    """
    r = np.asarray(r, dtype=float)
    if c == 0.0:
        return np.zeros_like(r)
    t = np.sqrt(abs(c)) * r
    t2 = t * t
    sgn = -1.0 if c > 0 else 1.0
    series = sgn * t2 / 3 - t2**2 / 45 + sgn * 2 * t2**3 / 945 - t2**4 / 4725
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = r * s_ratio(c, np.where(t < 0.1, 1.0, r)) - 1.0
    return np.where(t < 0.1, series, direct)


# ---------------------------------------------------------------------------
# model spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelManifold:
    """Base class of the model spaces.  ``dim`` is the manifold dimension N."""

    dim: int
    kind: ClassVar[str] = "abstract"

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 3:
            raise ValueError(f"dimension must be an integer >= 3, got {self.dim}")

    @property
    def curvature(self) -> float:
        raise NotImplementedError

    @property
    def ambient_dim(self) -> int:
        return self.dim

    @property
    def origin(self) -> np.ndarray:
        """Distinguished chart point (chart origin, or the north pole)."""
        return np.zeros(self.ambient_dim)

    # subclasses implement the following
    def check(self, x):
        raise NotImplementedError

    def distance(self, x, y):
        raise NotImplementedError

    def grad_distance(self, a, x):
        raise NotImplementedError

    def metric_inner(self, x, u, v):
        raise NotImplementedError

    def volume_weight(self, x):
        raise NotImplementedError

    def exp(self, x, v):
        raise NotImplementedError

    def polar_point(self, center, r, directions):
        """Point at geodesic distance ``r`` from ``center`` along unit chart directions.

        ``directions`` are Euclidean-unit chart vectors at ``center`` (tangent
        to the sphere for the cap); for the conformal charts these are also
        metric directions, so uniform chart directions give uniform geodesic
        directions.
        """
        raise NotImplementedError

    def random_directions(self, center, rng, m: int):
        """``m`` uniform unit chart directions in the tangent space at ``center``."""
        z = rng.standard_normal((m, self.dim))
        return z / _norm(z)[:, None]

    def metric_norm(self, x, u):
        return np.sqrt(np.maximum(self.metric_inner(x, u, u), 0.0))

    def log_radial(self, a, x):
        """``d(a, x) * grad d(a, .)`` at ``x``; smooth through ``x = a`` where it is 0."""
        x = np.asarray(x, dtype=float)
        d = self.distance(a, x)
        out = np.zeros(np.broadcast_shapes(np.shape(x), np.shape(a)))
        ok = d > POLE_CUTOFF
        if np.any(ok):
            xb = np.broadcast_to(x, out.shape)
            ab = np.broadcast_to(np.asarray(a, dtype=float), out.shape)
            out[ok] = d[ok][..., None] * self.grad_distance(ab[ok], xb[ok])
        return out


@dataclass(frozen=True)
class Euclidean(ModelManifold):
    kind: ClassVar[str] = "euclidean"

    @property
    def curvature(self) -> float:
        return 0.0

    def check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DomainError(f"expected {self.dim} coordinates, got {x.shape[-1]}")
        return x

    def distance(self, x, y):
        return _norm(self.check(x) - self.check(y))

    def grad_distance(self, a, x):
        diff = self.check(x) - self.check(a)
        d = _norm(diff)
        hit = d < POLE_CUTOFF
        if np.any(hit):
            raise SingularPointError("gradient of distance at its base point", hit)
        return diff / d[..., None]

    def metric_inner(self, x, u, v):
        return _dot(u, v)

    def volume_weight(self, x):
        x = self.check(x)
        return np.ones(x.shape[:-1])

    def exp(self, x, v):
        return self.check(x) + v

    def polar_point(self, center, r, directions):
        return center + np.asarray(r)[..., None] * directions


@dataclass(frozen=True)
class Hyperbolic(ModelManifold):
    """Poincare ball with metric ``rho(x)^2 |dx|^2``, ``rho = (2/R)/(1-|x|^2)``.

    Sectional curvature is ``-R**2``.
    """

    R: float = 1.0
    kind: ClassVar[str] = "hyperbolic"

    def __post_init__(self):
        super().__post_init__()
        if not self.R > 0:
            raise ValueError("curvature scale R must be positive")

    @property
    def curvature(self) -> float:
        return -self.R**2

    def check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DomainError(f"expected {self.dim} coordinates, got {x.shape[-1]}")
        if np.any(_dot(x, x) >= 1.0):
            raise DomainError("point outside the open unit ball")
        return x

    def _one_minus_sq(self, x):
        n = _norm(x)
        return (1.0 - n) * (1.0 + n)

    def conformal_factor(self, x):
        return (2.0 / self.R) / self._one_minus_sq(self.check(x))

    def distance(self, x, y):
        x = self.check(x)
        y = self.check(y)
        delta = _dot(x - y, x - y) / (self._one_minus_sq(x) * self._one_minus_sq(y))
        # arcosh(1 + 2 delta) = 2 arsinh(sqrt(delta)), stable near the diagonal
        return (2.0 / self.R) * np.arcsinh(np.sqrt(delta))

    def grad_distance(self, a, x):
        a = self.check(a)
        x = self.check(x)
        diff = x - a
        A = self._one_minus_sq(x)
        B = self._one_minus_sq(a)
        sq = _dot(diff, diff)
        delta = sq / (A * B)
        hit = (2.0 / self.R) * np.arcsinh(np.sqrt(delta)) < POLE_CUTOFF
        if np.any(hit):
            raise SingularPointError("gradient of distance at its base point", hit)
        ddelta = (2.0 / (A * B))[..., None] * (diff + x * (sq / A)[..., None])
        eucl = ddelta / (self.R * np.sqrt(delta * (1.0 + delta)))[..., None]
        # raise the index: chart gradient / rho^2
        return eucl * (self.R**2 * A * A / 4.0)[..., None]

    def metric_inner(self, x, u, v):
        return self.conformal_factor(x) ** 2 * _dot(u, v)

    def volume_weight(self, x):
        return self.conformal_factor(x) ** self.dim

    @staticmethod
    def mobius_add(a, y):
        """Mobius addition on the unit-curvature ball; ``y -> a (+) y`` is an isometry sending 0 to a."""
        ay = _dot(a, y)[..., None]
        aa = _dot(a, a)[..., None]
        yy = _dot(y, y)[..., None]
        num = (1.0 + 2.0 * ay + yy) * a + (1.0 - aa) * y
        return num / (1.0 + 2.0 * ay + aa * yy)

    def exp(self, x, v):
        # geodesics do not change under constant rescaling of the metric
        x = self.check(x)
        v = np.asarray(v, dtype=float)
        nv = _norm(v)
        lam = 2.0 / self._one_minus_sq(x)
        with np.errstate(invalid="ignore", divide="ignore"):
            y = np.where(
                (nv > 0)[..., None], np.tanh(0.5 * lam * nv)[..., None] * v / nv[..., None], 0.0
            )
        return self.mobius_add(x, y)

    def polar_point(self, center, r, directions):
        y = np.tanh(0.5 * self.R * np.asarray(r))[..., None] * directions
        return self.mobius_add(np.asarray(center, dtype=float), y)

    def chart_radius_of(self, geodesic_radius):
        """Chart norm of the points at distance ``geodesic_radius`` from the origin."""
        return np.tanh(0.5 * self.R * np.asarray(geodesic_radius))

    def geodesic_radius_of(self, chart_radius):
        return 2.0 * np.arctanh(np.asarray(chart_radius)) / self.R


@dataclass(frozen=True)
class SphereCap(ModelManifold):
    """Open upper hemisphere of the unit sphere S^N in R^{N+1} (curvature +1).

    Points are ambient unit vectors with positive last coordinate.  The
    chart used by :meth:`volume_weight` is vertical projection onto the
    first ``N`` coordinates.
    """

    kind: ClassVar[str] = "sphere"
    unit_tol: ClassVar[float] = 1e-12

    @property
    def curvature(self) -> float:
        return 1.0

    @property
    def ambient_dim(self) -> int:
        return self.dim + 1

    @property
    def origin(self) -> np.ndarray:
        e = np.zeros(self.dim + 1)
        e[-1] = 1.0
        return e

    def check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim + 1:
            raise DomainError(f"expected {self.dim + 1} ambient coordinates, got {x.shape[-1]}")
        if np.any(np.abs(_norm(x) - 1.0) > self.unit_tol):
            raise DomainError("sphere point is not a unit vector")
        if np.any(x[..., -1] <= 0.0):
            raise DomainError("point outside the open upper hemisphere")
        return x

    def distance(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        c = _dot(x, y)
        s = _norm(y - c[..., None] * x)
        return np.arctan2(s, c)

    def grad_distance(self, a, x):
        a = np.asarray(a, dtype=float)
        x = np.asarray(x, dtype=float)
        c = _dot(a, x)
        perp = a - c[..., None] * x
        s = _norm(perp)
        hit = np.arctan2(s, c) < POLE_CUTOFF
        if np.any(hit):
            raise SingularPointError("gradient of distance at its base point", hit)
        return -perp / s[..., None]

    def metric_inner(self, x, u, v):
        return _dot(u, v)

    def check_tangent(self, x, u, tol=1e-10):
        if np.any(np.abs(_dot(x, u)) > tol):
            raise DomainError("vector is not tangent to the sphere at its base point")
        return u

    def volume_weight(self, x):
        x = self.check(x)
        return 1.0 / x[..., -1]

    def from_chart(self, y):
        """Lift chart coordinates ``y`` (|y| < 1) to the hemisphere."""
        y = np.asarray(y, dtype=float)
        h = np.sqrt(np.maximum(1.0 - _dot(y, y), 0.0))
        return np.concatenate([y, h[..., None]], axis=-1)

    def exp(self, x, v):
        v = np.asarray(v, dtype=float)
        nv = _norm(v)
        with np.errstate(invalid="ignore", divide="ignore"):
            dirs = np.where((nv > 0)[..., None], v / nv[..., None], 0.0)
        return np.cos(nv)[..., None] * x + np.sin(nv)[..., None] * dirs

    def polar_point(self, center, r, directions):
        r = np.asarray(r)
        return np.cos(r)[..., None] * center + np.sin(r)[..., None] * directions

    def random_directions(self, center, rng, m: int):
        center = np.asarray(center, dtype=float)
        z = rng.standard_normal((m, self.dim + 1))
        z -= _dot(z, center)[:, None] * center
        return z / _norm(z)[:, None]

    def point_at(self, polar_angle, direction=None):
        """Hemisphere point at geodesic distance ``polar_angle`` from the north pole."""
        e = np.zeros(self.dim + 1)
        if direction is None:
            e[0] = 1.0
        else:
            e[: self.dim] = np.asarray(direction, dtype=float) / np.linalg.norm(direction)
        return np.cos(polar_angle) * self.origin + np.sin(polar_angle) * e


def make_manifold(kind: str, dim: int, R: float = 1.0) -> ModelManifold:
    kind = kind.lower()
    if kind == "euclidean":
        return Euclidean(dim)
    if kind == "hyperbolic":
        return Hyperbolic(dim, R)
    if kind in ("sphere", "spherecap", "sphere_cap"):
        return SphereCap(dim)
    raise ValueError(f"unknown manifold kind {kind!r}")


# ---------------------------------------------------------------------------
# functional forms of the primitive operations
# ---------------------------------------------------------------------------


def distance(M: ModelManifold, x, y):
    return M.distance(x, y)


def metric_inner(M: ModelManifold, x, u, v):
    return M.metric_inner(x, u, v)


def metric_norm(M: ModelManifold, x, u):
    return M.metric_norm(x, u)


def grad_distance(M: ModelManifold, a, x):
    return M.grad_distance(a, x)


def volume_weight(M: ModelManifold, x):
    return M.volume_weight(x)


def laplacian_distance(M: ModelManifold, a, x):
    d = M.distance(a, x)
    if np.any(d < POLE_CUTOFF):
        raise SingularPointError("Laplacian of distance at its base point", d < POLE_CUTOFF)
    return (M.dim - 1) * s_ratio(M.curvature, d)


def hessian_distance_bilinear(M: ModelManifold, a, x, X, Y):
    """Hess d(a, .)(X, Y) at x, i.e. s_ratio(c, d) * g(pi X, pi Y) with pi the radial projection."""
    g = M.grad_distance(a, x)
    s = s_ratio(M.curvature, M.distance(a, x))
    return s * (
        M.metric_inner(x, X, Y) - M.metric_inner(x, X, g) * M.metric_inner(x, Y, g)
    )


def hessian_distance_form(M: ModelManifold, a, x, X):
    return hessian_distance_bilinear(M, a, x, X, X)


# ---------------------------------------------------------------------------
# poles
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PoleSet:
    """``n >= 2`` distinct poles on a model space.

    ``delta`` is the largest distance from the north pole to a pole (sphere
    cap only, NaN otherwise).
    """

    manifold: ModelManifold
    poles: np.ndarray
    pairwise_distances: np.ndarray = field(init=False, repr=False)
    delta: float = field(init=False)

    def __post_init__(self):
        M = self.manifold
        poles = M.check(np.atleast_2d(np.asarray(self.poles, dtype=float)))
        if poles.shape[0] < 2:
            raise ValueError("a PoleSet needs at least two poles")
        D = M.distance(poles[:, None, :], poles[None, :, :])
        np.fill_diagonal(D, 0.0)
        off = D[~np.eye(len(poles), dtype=bool)]
        if np.min(off) <= POLE_CUTOFF:
            raise ValueError("poles must be pairwise distinct")
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "pairwise_distances", D)
        delta = float("nan")
        if isinstance(M, SphereCap):
            delta = float(np.max(M.distance(M.origin, poles)))
            if not delta < np.pi / 2:
                raise ValueError("sphere poles must lie in the open hemisphere (delta < pi/2)")
        object.__setattr__(self, "delta", delta)

    @property
    def n(self) -> int:
        return self.poles.shape[0]

    @property
    def min_separation(self) -> float:
        D = self.pairwise_distances
        return float(np.min(D[~np.eye(self.n, dtype=bool)]))

    def __len__(self):
        return self.n

    def __getitem__(self, i):
        return self.poles[i]


@dataclass(frozen=True)
class PoleFrame:
    """Distances ``d`` (..., n) and unit gradients ``grads`` (..., n, dim) at a batch of points."""

    x: np.ndarray
    d: np.ndarray
    grads: np.ndarray


def pole_frame(M: ModelManifold, poles: PoleSet, x) -> PoleFrame:
    x = np.asarray(x, dtype=float)
    P = poles.poles
    d = M.distance(P, x[..., None, :])
    hit = np.any(d < POLE_CUTOFF, axis=-1)
    if np.any(hit):
        raise SingularPointError("point coincides with a pole", hit)
    grads = M.grad_distance(P, x[..., None, :])
    return PoleFrame(x, d, grads)


def _frame(M, poles, x, frame):
    return frame if frame is not None else pole_frame(M, poles, x)


def G_matrix(M: ModelManifold, poles: PoleSet, x, frame: PoleFrame | None = None):
    """``G_ij = g(grad d_i, grad d_j)``, shape (..., n, n)."""
    f = _frame(M, poles, x, frame)
    gi = f.grads[..., :, None, :]
    gj = f.grads[..., None, :, :]
    return M.metric_inner(f.x[..., None, None, :], gi, gj)


def v_field(M: ModelManifold, poles: PoleSet, x, frame: PoleFrame | None = None):
    """``v = sum_i grad d_i / d_i``."""
    f = _frame(M, poles, x, frame)
    return np.sum(f.grads / f.d[..., None], axis=-2)


def v_norm_sq(M: ModelManifold, poles: PoleSet, x, frame: PoleFrame | None = None):
    """``|v|^2 = sum 1/d_i^2 + 2 sum_{i<j} G_ij/(d_i d_j)``."""
    f = _frame(M, poles, x, frame)
    G = G_matrix(M, poles, x, f)
    w = 1.0 / f.d
    return np.einsum("...i,...ij,...j->...", w, G, w)


def v_norm_sq_rearranged(M: ModelManifold, poles: PoleSet, x, frame: PoleFrame | None = None):
    """``|v|^2 = -sum_{i<j} |grad d_i/d_i - grad d_j/d_j|^2 + n sum 1/d_i^2``."""
    f = _frame(M, poles, x, frame)
    n = poles.n
    return -pair_difference_sq(M, poles, x, f) + n * np.sum(1.0 / f.d**2, axis=-1)


def pair_difference_sq(M: ModelManifold, poles: PoleSet, x, frame: PoleFrame | None = None):
    """``sum_{i<j} |grad d_i/d_i - grad d_j/d_j|^2``."""
    f = _frame(M, poles, x, frame)
    w = f.grads / f.d[..., None]
    iu, ju = np.triu_indices(poles.n, k=1)
    diff = w[..., iu, :] - w[..., ju, :]
    return np.sum(M.metric_inner(f.x[..., None, :], diff, diff), axis=-1)
