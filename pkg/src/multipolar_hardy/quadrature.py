"""Stratified Monte Carlo integration against the Riemannian volume.

Every stratum is a geodesic annulus ``{lo <= d(center, x) <= hi}`` sampled
in geodesic polar coordinates: a uniform direction and a radius drawn from
a density proportional to ``s_c(r)^(N-1) r^(-q)``.  With ``q`` equal to the
order of a ``d^(-q)`` singularity at the centre, the weighted samples stay
bounded.  The strata are

* one ball of radius ``pole_ball_radius`` around each pole, with
  ``q = importance_exponent``;
* each component of the support with all pole balls cut out, split into
  ``radial_shells`` concentric shells, divided by the number of overlapping
  components.  Half of the bulk samples come from the volume-uniform radial
  law and half from ``q``-weighted radial laws around nearby poles; the
  weight uses the full mixture density;
* for a whole-chart support on flat space, an exterior region sampled from a
  Pareto tail with ``q = tail_exponent``.

Each radius is evaluated along a group of directions: either the
``2N`` vectors ``+-Q e_i`` of a Haar-random orthonormal frame ``Q`` (a
spherical 3-design, exact for angular harmonics up to degree 3), or (the
default) the antithetic pair ``(theta, -theta)``.  Each group mean is one independent
draw for the error estimate.  A pilot phase sets
the Neyman allocation of the remaining samples across strata and is then
discarded.  Every chunk of samples has its own seed substream keyed by
``(seed, stratum, phase, chunk)``, so results do not depend on how the work
is split across workers.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import integrate as sp_integrate

from .functions import Annulus, WholeChart, region_parts
from .geometry import (
    Hyperbolic,
    ModelManifold,
    PointError,
    PoleSet,
    SphereCap,
    s_func,
    sphere_area,
)

_GRID = 2048


@dataclass(frozen=True)
class QuadConfig:
    total_samples: int = 200_000
    pole_ball_radius: float | None = None
    importance_exponent: float | None = None
    seed: int = 0
    max_resamples: int = 20
    tail_exponent: float | None = None
    pilot_fraction: float = 0.1
    chunk_size: int = 8192
    truncation: float = 0.995
    radial_shells: int = 8
    directions: str = "antithetic"

    def __post_init__(self):
        if self.total_samples < 64:
            raise ValueError("total_samples must be at least 64")
        if not 0 < self.pilot_fraction < 1:
            raise ValueError("pilot_fraction must lie in (0, 1)")
        if self.directions not in ("frame", "antithetic"):
            raise ValueError("directions must be 'frame' or 'antithetic'")

    def with_(self, **kw) -> "QuadConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class StratumEstimate:
    region: str
    value: float
    std_error: float
    samples: int


@dataclass(frozen=True)
class QuadratureEstimate:
    value: float
    std_error: float
    samples: int
    seed: int
    strata_report: list = field(default_factory=list)

    @property
    def rel_error(self) -> float:
        return self.std_error / abs(self.value) if self.value != 0 else (0.0 if self.std_error == 0 else np.inf)

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "samples": self.samples,
            "seed": self.seed,
            "strata_report": [s.__dict__.copy() for s in self.strata_report],
        }


class QuadratureError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# radial samplers
# ---------------------------------------------------------------------------


class RadialSampler:
    """Radius sampler on ``[lo, hi]`` with density roughly ``s_c(r)^(N-1) r^(-q)``.

    The proposal is piecewise constant on a (log-spaced) grid, so the density
    used in the importance weight is exact.  ``hi = inf`` switches to a
    Pareto tail ``r^(N-1-q)`` with ``q > N`` (flat space only).
    """

    def __init__(self, c: float, N: int, lo: float, hi: float, q: float):
        self.c, self.N, self.lo, self.hi, self.q = c, N, float(lo), float(hi), float(q)
        if not 0 <= lo < hi:
            raise ValueError("radial window must satisfy 0 <= lo < hi")
        self.tail = np.isinf(hi)
        if self.tail:
            if c != 0:
                raise ValueError("unbounded radial windows are only supported in flat space")
            if not (lo > 0 and q > N):
                raise ValueError("a tail stratum needs lo > 0 and tail exponent > N")
            return
        if lo == 0 and q >= N:
            raise ValueError("importance exponent must be < N for a window reaching the centre")
        if lo == 0:
            edges = np.concatenate([[0.0], np.geomspace(hi * 1e-12, hi, _GRID)])
        else:
            edges = np.geomspace(lo, hi, _GRID + 1)
        mid = np.sqrt(edges[1:] * np.maximum(edges[:-1], edges[1] * 1e-3))
        width = np.diff(edges)
        mass = s_func(c, mid) ** (N - 1) * mid ** (-q) * width
        if lo == 0:
            # s_c(r) ~ r on the innermost cell
            mass[0] = edges[1] ** (N - q) / (N - q)
        if np.any(~np.isfinite(mass)) or np.any(mass <= 0):
            raise ValueError("radial proposal is not normalisable on this window")
        self.edges = edges
        self.width = width
        self.cdf = np.concatenate([[0.0], np.cumsum(mass)])
        self.Z = self.cdf[-1]
        self.cdf /= self.Z
        self.density = mass / (self.Z * width)

    def pdf(self, r):
        """Proposal density at radii ``r`` (zero outside the window)."""
        r = np.asarray(r, dtype=float)
        if self.tail:
            k = self.q - self.N
            with np.errstate(divide="ignore"):
                return np.where(r >= self.lo, k * self.lo**k * np.maximum(r, self.lo) ** (self.N - 1 - self.q), 0.0)
        j = np.clip(np.searchsorted(self.edges, r, side="right") - 1, 0, len(self.width) - 1)
        return np.where((r >= self.lo) & (r <= self.hi), self.density[j], 0.0)

    def sample(self, rng, m: int):
        """Return radii and their proposal densities."""
        u = rng.random(m)
        if self.tail:
            k = self.q - self.N
            r = self.lo * (1.0 - u) ** (-1.0 / k)
            pdf = k * self.lo**k * r ** (self.N - 1 - self.q)
            return r, pdf
        j = np.searchsorted(self.cdf, u, side="right") - 1
        j = np.clip(j, 0, len(self.width) - 1)
        v = rng.random(m)
        r = self.edges[j] + v * self.width[j]
        return r, self.density[j]


@dataclass
class _Stratum:
    """One stratum; bulk strata may carry extra pole-centred mixture components."""

    label: str
    center: np.ndarray
    sampler: RadialSampler
    is_pole: bool
    part_index: int = -1
    mixture: list = field(default_factory=list)  # (center, sampler) pairs besides the main one

    @property
    def n_components(self) -> int:
        return 1 + len(self.mixture)


def default_pole_ball_radius(M: ModelManifold, poles: PoleSet) -> float:
    """``min(0.25 * min pole separation, 0.25 * distance from a pole to the chart edge)``."""
    r = 0.25 * poles.min_separation
    if isinstance(M, SphereCap):
        edge = np.pi / 2 - M.distance(M.origin, poles.poles)
        r = min(r, 0.25 * float(np.min(edge)))
    return r


def _whole_chart_parts(M: ModelManifold, poles: PoleSet | None, cfg: QuadConfig, r_b: float):
    """Bounded annuli (plus an optional tail) covering a whole-chart support."""
    if isinstance(M, Hyperbolic):
        return [Annulus(M.origin, 0.0, float(M.geodesic_radius_of(cfg.truncation)))], None
    if isinstance(M, SphereCap):
        return [Annulus(M.origin, 0.0, np.pi / 2)], None
    if cfg.tail_exponent is None:
        raise ValueError("a whole-chart support on flat space needs tail_exponent > N")
    if poles is None:
        raise ValueError("a whole-chart support on flat space needs poles to anchor the strata")
    center = poles.poles.mean(axis=0)
    spread = float(np.max(np.linalg.norm(poles.poles - center, axis=-1)))
    D = 2.0 * spread + 2.0 * r_b + 1.0
    return [Annulus(center, 0.0, D)], (center, D)


def build_strata(M: ModelManifold, support, poles: PoleSet | None, cfg: QuadConfig):
    c, N = M.curvature, M.dim
    r_b = 0.0
    if poles is not None:
        r_b = cfg.pole_ball_radius if cfg.pole_ball_radius is not None else default_pole_ball_radius(M, poles)
        if not 0 < r_b < 0.5 * poles.min_separation:
            raise ValueError("pole_ball_radius must lie in (0, half the minimum pole separation)")
        if isinstance(M, SphereCap):
            edge = np.pi / 2 - M.distance(M.origin, poles.poles)
            if np.any(r_b >= edge):
                raise ValueError("pole balls must stay inside the hemisphere")

    parts = region_parts(support)
    tail = None
    whole = isinstance(parts[0], WholeChart)
    if whole:
        parts, tail = _whole_chart_parts(M, poles, cfg, r_b)

    strata: list[_Stratum] = []
    if poles is not None:
        for i, a in enumerate(poles.poles):
            lo, hi = 0.0, r_b
            if not whole:
                near = [p for p in parts if M.distance(p.center, a) < r_b + p.R]
                if not near:
                    continue
                centred = [p for p in near if M.distance(p.center, a) < 1e-12]
                if len(centred) == len(near):
                    lo = min(p.r for p in centred)
                    hi = min(r_b, max(p.R for p in centred))
                    if lo >= hi:
                        continue
            q = cfg.importance_exponent or 0.0
            strata.append(_Stratum(f"pole[{i}]", a, RadialSampler(c, N, lo, hi, q), True))
    q = cfg.importance_exponent or 0.0
    for k, p in enumerate(parts):
        dc = M.distance(poles.poles, p.center) if poles is not None else np.empty(0)
        if np.any(dc + p.R <= r_b):
            continue  # lies inside a pole ball
        edges = np.linspace(p.r, p.R, max(int(cfg.radial_shells), 1) + 1)
        for j, (lo_k, hi_k) in enumerate(zip(edges[:-1], edges[1:])):
            if np.any(dc + hi_k <= r_b):
                continue
            st = _Stratum(f"bulk[{k}].{j}", p.center, RadialSampler(c, N, lo_k, hi_k, 0.0), False, k)
            if q > 0:
                # defensive mixture: half of the samples come from radial
                # proposals around nearby poles, restricted to outside the pole balls
                for a, da in zip(poles.poles, dc):
                    lo_a, hi_a = max(r_b, da - hi_k), da + hi_k
                    if lo_a < hi_a and da - hi_k < 2.0 * r_b:
                        st.mixture.append((a, RadialSampler(c, N, lo_a, hi_a, q)))
            strata.append(st)
    if tail is not None:
        center, D = tail
        strata.append(
            _Stratum("tail", center, RadialSampler(c, N, D, np.inf, cfg.tail_exponent), False, -2)
        )
    return strata, parts, r_b


# ---------------------------------------------------------------------------
# the estimator
# ---------------------------------------------------------------------------


def _as_dict(values):
    if isinstance(values, dict):
        return values, True
    return {"value": values}, False


class _Evaluator:
    def __init__(self, M, integrand, strata, parts, poles, r_b, cfg):
        self.M, self.f, self.strata, self.parts = M, integrand, strata, parts
        self.poles, self.r_b, self.cfg = poles, r_b, cfg
        self.area = sphere_area(M.dim - 1)
        self.keys = None

    def _bulk_factor(self, s: _Stratum, x):
        """0 inside pole balls, else 1/(number of overlapping support parts)."""
        M = self.M
        keep = np.ones(x.shape[0], dtype=bool)
        if self.poles is not None:
            d = M.distance(self.poles.poles, x[:, None, :])
            keep &= np.all(d >= self.r_b, axis=-1)
        if s.part_index == -2:
            return keep.astype(float)
        dc = M.distance(s.center, x)
        keep &= (dc >= s.sampler.lo) & (dc <= s.sampler.hi)
        count = np.zeros(x.shape[0])
        for p in self.parts:
            d = M.distance(p.center, x)
            count += (d >= p.r) & (d <= p.R)
        return np.where(keep & (count > 0), 1.0 / np.maximum(count, 1), 0.0)

    @property
    def group_size(self) -> int:
        return 2 * self.M.dim if self.cfg.directions == "frame" else 2

    def _directions(self, center, rng, m):
        """Direction sets ``(G, m, ambient)``: +-theta pairs or +- a random orthonormal frame."""
        M = self.M
        if self.cfg.directions != "frame":
            th = M.random_directions(center, rng, m)
            return np.stack([th, -th])
        # N random tangent directions, orthonormalised: a Haar frame up to signs
        raw = M.random_directions(center, rng, m * M.dim).reshape(m, M.dim, -1)
        Q, _ = np.linalg.qr(np.swapaxes(raw, 1, 2))  # (m, ambient, N)
        frame = np.moveaxis(Q, 2, 0)  # (N, m, ambient)
        return np.concatenate([frame, -frame])

    def _draw(self, s: _Stratum, rng, m):
        """``m`` direction groups sharing a radius; points ``(G*m, dim)`` and volume weights."""
        M = self.M
        G = self.group_size
        if not s.mixture:
            r, pdf = s.sampler.sample(rng, m)
            dirs = self._directions(s.center, rng, m)
            pts = M.polar_point(s.center, np.broadcast_to(r, (G, m)), dirs).reshape(G * m, -1)
            w = np.tile(s_func(M.curvature, r) ** (M.dim - 1) * self.area / pdf, G)
            return pts, w
        comps = [(s.center, s.sampler)] + list(s.mixture)
        probs = np.array([0.5] + [0.5 / len(s.mixture)] * len(s.mixture))
        which = rng.choice(len(comps), size=m, p=probs)
        pts = np.empty((G, m, M.ambient_dim))
        for k, (c, smp) in enumerate(comps):
            sel = which == k
            mk = int(sel.sum())
            if mk == 0:
                continue
            r, _ = smp.sample(rng, mk)
            pts[:, sel] = M.polar_point(c, np.broadcast_to(r, (G, mk)), self._directions(c, rng, mk))
        pts = pts.reshape(G * m, -1)
        dens = np.zeros(G * m)
        for pk, (c, smp) in zip(probs, comps):
            d = M.distance(c, pts)
            sd = s_func(M.curvature, d) ** (M.dim - 1)
            with np.errstate(divide="ignore", invalid="ignore"):
                dens += pk * np.where(sd > 0, smp.pdf(d) / (self.area * sd), 0.0)
        with np.errstate(divide="ignore"):
            w = np.where(dens > 0, 1.0 / dens, 0.0)
        return pts, w

    def _values(self, s: _Stratum, rng, m):
        """Per-group means of weighted integrand values, dict of (m,) arrays."""
        G = self.group_size
        pts, w = self._draw(s, rng, m)
        for _ in range(self.cfg.max_resamples + 1):
            fac = np.ones(G * m) if s.is_pole else self._bulk_factor(s, pts)
            live = fac > 0
            try:
                raw = self.f(pts[live]) if np.any(live) else None
            except PointError as err:
                bad = np.zeros(G * m, dtype=bool)
                if err.mask is None or np.shape(err.mask) != (int(live.sum()),):
                    raise
                bad[np.flatnonzero(live)[np.asarray(err.mask)]] = True
                redo = np.flatnonzero(bad.reshape(G, m).any(axis=0))
                p2, w2 = self._draw(s, rng, len(redo))
                idx = (np.arange(G)[:, None] * m + redo[None, :]).ravel()
                pts[idx], w[idx] = p2, w2
                continue
            vals = {}
            if raw is not None:
                d, _ = _as_dict(raw)
                if self.keys is None:
                    self.keys = list(d)
                for key in self.keys:
                    full = np.zeros(G * m)
                    full[live] = np.asarray(d[key], dtype=float)
                    vals[key] = full
            else:
                if self.keys is None:
                    self.keys = ["value"]
                for key in self.keys:
                    vals[key] = np.zeros(G * m)
            out = {}
            for key, v in vals.items():
                contrib = v * w * fac
                if not np.all(np.isfinite(contrib)):
                    raise QuadratureError(f"non-finite integrand values in stratum {s.label}")
                out[key] = contrib.reshape(G, m).mean(axis=0)
            return out
        raise QuadratureError(f"resample budget exhausted in stratum {s.label}")

    def run(self, s_index: int, phase: int, groups: int):
        """Accumulate sums over ``groups`` direction groups in fixed-size seeded chunks."""
        s = self.strata[s_index]
        chunk = max(self.cfg.chunk_size // self.group_size, 1)
        sums, sq = {}, {}
        done, c = 0, 0
        while done < groups:
            m = min(chunk, groups - done)
            ss = np.random.SeedSequence(entropy=self.cfg.seed, spawn_key=(s_index, phase, c))
            vals = self._values(s, np.random.default_rng(ss), m)
            for key, v in vals.items():
                sums[key] = sums.get(key, 0.0) + float(np.sum(v))
                sq[key] = sq.get(key, 0.0) + float(np.sum(v * v))
            done += m
            c += 1
        return {k: (sums[k], sq[k], groups) for k in sums}


def _moments(acc):
    total, sq, n = acc
    mean = total / n
    var = max(sq / n - mean * mean, 0.0) * n / max(n - 1, 1)
    return mean, var


def integrate(
    M: ModelManifold,
    integrand: Callable,
    support,
    poles: PoleSet | None,
    cfg: QuadConfig = QuadConfig(),
):
    """Estimate ``int_support integrand dv_g``.

    ``integrand`` maps an ``(m, dim)`` batch to an ``(m,)`` array, or to a
    dict of such arrays to integrate several quantities on the same samples
    (the return value is then a dict of estimates).  It must vanish outside
    ``support``.  A :class:`~multipolar_hardy.geometry.PointError` with a
    mask triggers redrawing of the flagged samples.
    """
    strata, parts, r_b = build_strata(M, support, poles, cfg)
    ev = _Evaluator(M, integrand, strata, parts, poles, r_b, cfg)
    try:
        probe = integrand(np.empty((0, M.ambient_dim)))
        ev.keys = list(probe) if isinstance(probe, dict) else ["value"]
    except Exception:
        pass  # keys are fixed by the first non-empty batch instead
    S = len(strata)
    if S == 0:
        raise QuadratureError("no strata: the support does not intersect the chart")
    G = ev.group_size
    groups_total = max(cfg.total_samples // G, 1)
    pilot_groups = max(64, int(cfg.pilot_fraction * groups_total) // S)
    main_groups = max(groups_total - pilot_groups * S, 32 * S)

    pilot = [ev.run(i, 0, pilot_groups) for i in range(S)]
    keys = ev.keys or ["value"]
    scale = {}
    for k in keys:
        tot = sum(abs(_moments(p[k])[0]) for p in pilot)
        scale[k] = tot if tot > 0 else 1.0
    sigma = np.array([np.sqrt(sum(_moments(p[k])[1] / scale[k] ** 2 for k in keys)) for p in pilot])
    floor = max(16, main_groups // (50 * S))
    if sigma.sum() > 0:
        alloc = np.maximum(np.floor((main_groups - floor * S) * sigma / sigma.sum()), 0).astype(int) + floor
    else:
        alloc = np.full(S, main_groups // S)
    main = [ev.run(i, 1, int(alloc[i])) for i in range(S)]

    used = G * (pilot_groups * S + int(alloc.sum()))
    results = {}
    for k in keys:
        report = []
        val, var = 0.0, 0.0
        for i, s in enumerate(strata):
            mean, v = _moments(main[i][k])
            n = main[i][k][2]
            se = np.sqrt(v / n)
            report.append(StratumEstimate(s.label, mean, float(se), G * n))
            val += mean
            var += v / n
        results[k] = QuadratureEstimate(float(val), float(np.sqrt(var)), used, cfg.seed, report)
    return results if keys != ["value"] else results["value"]


def radial_integrate_1d(c: float, N: int, f: Callable, r0: float, r1: float, tol: float = 1e-10) -> float:
    """Adaptive quadrature of ``int_{r0}^{r1} f(r) s_c(r)^(N-1) dr``."""
    if not 0 <= r0 < r1:
        raise ValueError("need 0 <= r0 < r1")

    def g(r):
        return f(r) * float(s_func(c, r)) ** (N - 1)

    with warnings.catch_warnings():
        warnings.simplefilter("error", sp_integrate.IntegrationWarning)
        try:
            val, err = sp_integrate.quad(g, r0, r1, epsabs=0.0, epsrel=tol, limit=500)
        except sp_integrate.IntegrationWarning as w:
            raise QuadratureError(f"radial quadrature did not converge: {w}") from None
    if err > max(tol * abs(val), 1e-300) * 10:
        raise QuadratureError("radial quadrature did not reach the requested tolerance")
    return float(val)


__all__ = [
    "QuadConfig",
    "QuadratureEstimate",
    "StratumEstimate",
    "QuadratureError",
    "RadialSampler",
    "build_strata",
    "default_pole_ball_radius",
    "integrate",
    "radial_integrate_1d",
]
