import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from multipolar_hardy.functions import Annulus, Ball, UnionOf, WholeChart
from multipolar_hardy.geometry import Euclidean, Hyperbolic, PoleSet, SphereCap, sphere_area
from multipolar_hardy.quadrature import (
    QuadConfig,
    RadialSampler,
    build_strata,
    integrate,
    radial_integrate_1d,
)

# frozen reference values (30-digit mpmath evaluations)
INT_SINH3_OVER_R2 = 0.64486681221834448892  # int_0^1 sinh(r)^3 / r^2 dr
BALL_VOLUME_3D = 4.1887902047863909846


def _ball_indicator(M, a, R):
    return lambda x: (M.distance(a, x) <= R).astype(float)


class TestRadial1D:
    def test_flat(self):
        assert radial_integrate_1d(0.0, 3, lambda r: 1.0, 0.0, 1.0) == pytest.approx(1 / 3, rel=1e-12)

    def test_hyperbolic_singular(self):
        val = radial_integrate_1d(-1.0, 4, lambda r: r**-2.0, 0.0, 1.0, tol=1e-10)
        assert val == pytest.approx(INT_SINH3_OVER_R2, rel=1e-9)
        # sinh^3 r = sum_k (3^(2k+1) - 3) r^(2k+1) / (4 (2k+1)!), integrated against r^-2
        from math import factorial

        series = sum((3 ** (2 * k + 1) - 3) / (4 * factorial(2 * k + 1) * 2 * k) for k in range(1, 12))
        assert val == pytest.approx(series, rel=1e-12)

    def test_sphere(self):
        assert radial_integrate_1d(1.0, 2, lambda r: 1.0, 0.0, np.pi / 2) == pytest.approx(1.0, rel=1e-12)

    def test_bad_window(self):
        with pytest.raises(ValueError):
            radial_integrate_1d(0.0, 3, lambda r: 1.0, 1.0, 0.5)


class TestRadialSampler:
    @pytest.mark.parametrize("c,lo,hi,q", [(0.0, 0.0, 1.0, 2.0), (-1.0, 0.1, 2.0, 0.0), (1.0, 0.2, 1.4, 3.5)])
    def test_pdf_normalised(self, c, lo, hi, q):
        s = RadialSampler(c, 4, lo, hi, q)
        r = np.linspace(lo, hi, 400_001)
        assert trapezoid(s.pdf(r), r) == pytest.approx(1.0, rel=1e-3)

    def test_samples_follow_pdf(self):
        s = RadialSampler(-1.0, 4, 0.0, 1.0, 2.0)
        r, pdf = s.sample(np.random.default_rng(0), 200_000)
        np.testing.assert_allclose(pdf, s.pdf(r))
        assert np.all((r >= 0) & (r <= 1))
        # mean matches the density
        grid = np.linspace(0, 1, 200_001)
        mean = trapezoid(grid * s.pdf(grid), grid)
        assert np.mean(r) == pytest.approx(mean, rel=5e-3)

    def test_tail(self):
        s = RadialSampler(0.0, 4, 2.0, np.inf, 6.0)
        r, pdf = s.sample(np.random.default_rng(1), 1000)
        assert np.all(r >= 2.0)
        np.testing.assert_allclose(pdf, s.pdf(r))

    def test_rejects(self):
        with pytest.raises(ValueError):
            RadialSampler(0.0, 4, 0.0, 1.0, 4.0)
        with pytest.raises(ValueError):
            RadialSampler(-1.0, 4, 1.0, np.inf, 6.0)


class TestIntegrate:
    def test_ball_volume(self):
        M = Euclidean(3)
        est = integrate(M, _ball_indicator(M, np.zeros(3), 1.0), Ball(np.zeros(3), 1.0), None, QuadConfig(50_000))
        assert abs(est.value - BALL_VOLUME_3D) <= 3 * est.std_error
        assert est.rel_error < 1e-5

    def test_hyperbolic_singular_oracle(self):
        M = Hyperbolic(4)
        a = np.zeros(4)
        P = PoleSet(M, np.array([a, [0.9, 0, 0, 0]]))
        f = lambda x: np.where(M.distance(a, x) <= 1.0, np.maximum(M.distance(a, x), 1e-300) ** -2.0, 0.0)
        est = integrate(M, f, Ball(a, 1.0), P, QuadConfig(100_000, importance_exponent=2.0, seed=3))
        exact = sphere_area(3) * INT_SINH3_OVER_R2
        assert abs(est.value - exact) <= 3 * est.std_error
        assert est.rel_error < 1e-2

    def test_sphere_hemisphere_area(self):
        M = SphereCap(3)
        est = integrate(M, lambda x: np.ones(len(x)), WholeChart(), None, QuadConfig(20_000))
        assert abs(est.value - 0.5 * sphere_area(3)) <= 3 * est.std_error
        assert est.rel_error < 1e-5

    def test_flat_whole_space_tail(self):
        M = Euclidean(3)
        P = PoleSet(M, np.array([[1.0, 0, 0], [-1.0, 0, 0]]))
        f = lambda x: np.exp(-np.sum(x * x, axis=-1))
        est = integrate(M, f, WholeChart(), P, QuadConfig(100_000, tail_exponent=6.0, seed=1))
        assert abs(est.value - np.pi**1.5) <= 4 * est.std_error
        with pytest.raises(ValueError):
            integrate(M, f, WholeChart(), P, QuadConfig(1000))

    def test_deterministic(self):
        M = Hyperbolic(4)
        P = PoleSet(M, np.array([[0.3, 0, 0, 0], [-0.3, 0, 0, 0]]))
        f = lambda x: {"a": np.sum(x**2, axis=-1), "b": np.ones(len(x))}
        cfg = QuadConfig(20_000, seed=11)
        r1 = integrate(M, f, Ball(np.zeros(4), 1.0), P, cfg)
        r2 = integrate(M, f, Ball(np.zeros(4), 1.0), P, cfg)
        assert set(r1) == {"a", "b"}
        assert r1["a"].as_dict() == r2["a"].as_dict()
        r3 = integrate(M, f, Ball(np.zeros(4), 1.0), P, cfg.with_(seed=12))
        assert r3["a"].value != r1["a"].value

    def test_unbiased_over_seeds(self):
        # mean z-score of a singular integral over independent seeds
        M = Euclidean(4)
        P = PoleSet(M, np.array([[0.5, 0, 0, 0], [-0.5, 0, 0, 0]]))
        d = lambda x: M.distance(P.poles, x[:, None, :])
        f = lambda x: np.sum(np.maximum(d(x), 1e-300) ** -2.0, axis=-1) * (np.linalg.norm(x, axis=-1) <= 1.0)
        exact = 0.0
        for a in P.poles:
            # |a| = 0.5 inside the unit ball; int_{B_1} |x-a|^-2 dx in R^4
            g = lambda r: r**-2.0 * _cap_fraction(r, 0.5, 1.0, 4)
            exact += sphere_area(3) * _quad(lambda r: g(r) * r**3, 0, 1.5)
        z = []
        for seed in range(8):
            est = integrate(M, f, Ball(np.zeros(4), 1.0), P, QuadConfig(20_000, importance_exponent=2.0, seed=seed))
            z.append((est.value - exact) / est.std_error)
        assert abs(np.mean(z)) < 3 / np.sqrt(len(z))

    def test_pole_resampling_and_strata(self):
        M = Euclidean(3)
        P = PoleSet(M, np.array([[0.5, 0, 0], [-0.5, 0, 0]]))
        strata, parts, r_b = build_strata(M, Ball(np.zeros(3), 1.0), P, QuadConfig(importance_exponent=1.0))
        assert sum(s.is_pole for s in strata) == 2
        assert r_b == pytest.approx(0.25)

    def test_support_inside_pole_ball(self):
        M = Euclidean(3)
        P = PoleSet(M, np.array([[0.5, 0, 0], [-0.5, 0, 0]]))
        est = integrate(M, _ball_indicator(M, P[0], 0.1), Ball(P[0], 0.1), P, QuadConfig(5000))
        assert abs(est.value - BALL_VOLUME_3D * 1e-3) <= 3 * est.std_error

    def test_bad_config(self):
        with pytest.raises(ValueError):
            QuadConfig(10)
        with pytest.raises(ValueError):
            QuadConfig(directions="sobol")

    @given(st.floats(0.1, 10.0))
    def test_linear_in_integrand(self, lam):
        M = Hyperbolic(3)
        cfg = QuadConfig(2_000, seed=5)
        f = lambda x: 1.0 + x[:, 0] ** 2
        a = integrate(M, f, Ball(np.zeros(3), 0.8), None, cfg)
        b = integrate(M, lambda x: lam * f(x), Ball(np.zeros(3), 0.8), None, cfg)
        assert b.value == pytest.approx(lam * a.value, rel=1e-12)
        assert b.std_error == pytest.approx(lam * a.std_error, rel=1e-9)


def _quad(f, a, b):
    from scipy.integrate import quad

    return quad(f, a, b, limit=200, points=[0.5])[0]


def _cap_fraction(r, s, R, N):
    """Fraction of the sphere S_r(a), |a| = s, lying inside the ball B_R(0) in R^N."""
    from scipy.special import betainc

    if r <= R - s:
        return 1.0
    if r >= R + s:
        return 0.0
    cos_t = (R * R - s * s - r * r) / (2 * r * s)
    # normalised area of the cap {angle to a-direction >= theta} with cos theta = cos_t ... measured from -a
    x = 1 - cos_t**2
    half = 0.5 * betainc((N - 1) / 2, 0.5, x)
    return 1 - half if cos_t >= 0 else half


class TestEstimatorProperties:
    def test_error_scales_as_root_n(self):
        M = Hyperbolic(3)
        f = lambda x: np.cos(3 * x[:, 0]) + x[:, 1] ** 2
        ratios = []
        for seed in range(20):
            a = integrate(M, f, Ball(np.zeros(3), 1.0), None, QuadConfig(4000, seed=seed))
            b = integrate(M, f, Ball(np.zeros(3), 1.0), None, QuadConfig(8000, seed=seed))
            ratios.append(a.std_error / b.std_error)
        assert np.sqrt(2) / 1.5 <= np.mean(ratios) <= np.sqrt(2) * 1.5

    def test_bulk_exact_zero_for_pole_supported_integrand(self):
        M = Euclidean(3)
        P = PoleSet(M, np.array([[0.5, 0, 0], [-0.5, 0, 0]]))
        f = lambda x: (M.distance(P[0], x) < 0.2).astype(float)
        est = integrate(M, f, Ball(np.zeros(3), 1.5), P, QuadConfig(20_000, importance_exponent=1.0))
        bulk = [s for s in est.strata_report if s.region.startswith("bulk")]
        assert bulk and all(s.value == 0.0 and s.std_error == 0.0 for s in bulk)

    def test_unbiased_ball_volume_50_seeds(self):
        M = Hyperbolic(3)
        R = 0.8
        exact = radial_integrate_1d(-1.0, 3, lambda r: 1.0, 0.0, R) * sphere_area(2)
        ests = [
            integrate(M, lambda x: np.ones(len(x)), Ball(np.zeros(3), R), None, QuadConfig(2000, seed=s))
            for s in range(50)
        ]
        mean = np.mean([e.value for e in ests])
        se = np.sqrt(np.sum([e.std_error**2 for e in ests])) / 50
        assert abs(mean - exact) <= 3 * se + 1e-12 * exact
