import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multipolar_hardy.geometry import (
    Euclidean,
    Hyperbolic,
    PoleSet,
    SphereCap,
    G_matrix,
    distance,
    grad_distance,
    hessian_distance_form,
    laplacian_distance,
    metric_inner,
    metric_norm,
    rs_ratio_minus_one,
    s_ratio,
    sphere_area,
    v_field,
    v_norm_sq,
    v_norm_sq_rearranged,
    volume_weight,
)

from conftest import random_points

# frozen reference values (30-digit mpmath evaluations)
LN3 = 1.0986122886681096914
COTH1 = 1.3130352854993313036
EIGHT_THIRDS_CUBED = 18.962962962962962963


def e(i, n):
    out = np.zeros(n)
    out[i] = 1.0
    return out


class TestDistance:
    def test_euclidean_3_4_5(self):
        assert distance(Euclidean(4), np.zeros(4), np.array([3.0, 4, 0, 0])) == pytest.approx(5.0, abs=1e-15)

    def test_hyperbolic_origin(self):
        d = distance(Hyperbolic(3, 1.0), np.zeros(3), 0.5 * e(0, 3))
        assert d == pytest.approx(LN3, rel=1e-14)

    def test_hyperbolic_scale(self):
        d = distance(Hyperbolic(3, 2.0), np.zeros(3), 0.5 * e(0, 3))
        assert d == pytest.approx(LN3 / 2, rel=1e-14)

    def test_sphere_quarter_circle(self):
        M = SphereCap(3)
        assert distance(M, M.origin, e(0, 4)) == pytest.approx(np.pi / 2, abs=1e-15)

    def test_hyperbolic_near_points_no_cancellation(self):
        M = Hyperbolic(4)
        x = np.array([0.3, 0.1, 0, 0])
        y = x + np.array([1e-9, 0, 0, 0])
        rho = 2.0 / (1 - x @ x)
        assert distance(M, x, y) == pytest.approx(rho * 1e-9, rel=1e-6)

    def test_rejects_points_outside_chart(self):
        with pytest.raises(ValueError):
            Hyperbolic(3).distance(np.zeros(3), np.array([1.0, 0, 0]))

    @given(st.integers(0, 2**32 - 1))
    def test_symmetry_and_triangle(self, seed):
        rng = np.random.default_rng(seed)
        for M in (Euclidean(4), Hyperbolic(4, 0.7), SphereCap(4)):
            x, y, z = random_points(M, rng, 3)
            assert M.distance(x, y) == pytest.approx(M.distance(y, x), rel=1e-12, abs=1e-14)
            assert M.distance(x, z) <= M.distance(x, y) + M.distance(y, z) + 1e-12


class TestMetric:
    def test_euclidean(self):
        u = e(0, 4)
        assert metric_inner(Euclidean(4), np.zeros(4), u, u) == 1.0

    def test_hyperbolic_origin(self):
        u = e(0, 3)
        assert metric_inner(Hyperbolic(3), np.zeros(3), u, u) == pytest.approx(4.0, rel=1e-15)

    def test_hyperbolic_half(self):
        u = e(0, 3)
        assert metric_inner(Hyperbolic(3), 0.5 * e(1, 3), u, u) == pytest.approx((2 / 0.75) ** 2, rel=1e-14)

    def test_volume_weight(self):
        assert volume_weight(Euclidean(3), np.ones(3)) == 1.0
        M = Hyperbolic(3)
        assert volume_weight(M, np.zeros(3)) == pytest.approx(8.0, rel=1e-15)
        assert volume_weight(M, 0.5 * e(2, 3)) == pytest.approx(EIGHT_THIRDS_CUBED, rel=1e-14)

    def test_sphere_area(self):
        assert sphere_area(2) == pytest.approx(4 * np.pi)
        assert sphere_area(3) == pytest.approx(2 * np.pi**2)


class TestGradient:
    def test_euclidean_unit(self):
        g = grad_distance(Euclidean(4), np.zeros(4), np.array([2.0, 0, 0, 0]))
        np.testing.assert_allclose(g, e(0, 4), atol=1e-15)

    def test_eikonal(self, model4):
        rng = np.random.default_rng(4)
        a = random_points(model4, rng, 200)
        x = random_points(model4, rng, 200)
        keep = model4.distance(a, x) > 1e-3
        n = metric_norm(model4, x[keep], grad_distance(model4, a[keep], x[keep]))
        np.testing.assert_allclose(n, 1.0, atol=1e-8)

    def test_sphere_gradient_in_great_circle_plane(self):
        M = SphereCap(4)
        rng = np.random.default_rng(0)
        a, x = random_points(M, rng, 2)
        g = grad_distance(M, a, x)
        assert abs(g @ x) < 1e-12
        # g lies in span(a, x)
        B = np.linalg.qr(np.stack([a, x], axis=1))[0]
        np.testing.assert_allclose(B @ (B.T @ g), g, atol=1e-12)


class TestComparison:
    def test_s_ratio_values(self):
        assert s_ratio(0.0, 2.0) == 0.5
        assert s_ratio(-1.0, 1.0) == pytest.approx(COTH1, rel=1e-14)
        assert s_ratio(1.0, np.pi / 2) == pytest.approx(0.0, abs=1e-15)

    def test_s_ratio_domain(self):
        with pytest.raises(ValueError):
            s_ratio(1.0, np.pi)
        with pytest.raises(ValueError):
            s_ratio(0.0, 0.0)

    @given(st.floats(-4.0, 4.0), st.floats(1e-6, 1e-3))
    def test_s_ratio_small_argument_series(self, c, r):
        # two-term expansion 1/r - c r / 3
        assert abs(s_ratio(c, r) - (1 / r - c * r / 3)) <= 10 * c * c * r**3 + 1e-12 / r

    @given(st.floats(-9.0, 9.0), st.floats(1e-4, 1.0))
    def test_rs_ratio_minus_one_matches_direct(self, c, r):
        if c > 0 and r * np.sqrt(c) >= 3.0:
            return
        direct = r * s_ratio(c, r) - 1.0
        assert rs_ratio_minus_one(c, r) == pytest.approx(direct, rel=1e-7, abs=1e-12)

    def test_laplacian_values(self):
        assert laplacian_distance(Euclidean(4), np.zeros(4), 2 * e(0, 4)) == pytest.approx(1.5)
        M = Hyperbolic(3)
        x = M.polar_point(np.zeros(3), np.array([1.0]), e(0, 3)[None])[0]
        assert laplacian_distance(M, np.zeros(3), x) == pytest.approx(2 * COTH1, rel=1e-12)
        S = SphereCap(3)
        assert laplacian_distance(S, S.origin, e(1, 4)) == pytest.approx(0.0, abs=1e-15)

    def test_hessian_values(self, model4):
        rng = np.random.default_rng(1)
        a, x = random_points(model4, rng, 2)
        g = grad_distance(model4, a, x)
        assert abs(hessian_distance_form(model4, a, x, g)) < 1e-12
        H = hessian_distance_form(Euclidean(4), np.zeros(4), 2 * e(0, 4), e(1, 4))
        assert H == pytest.approx(0.5)
        S = SphereCap(4)
        X = np.array([0.3, -0.2, 0.5, 0.1, 0.0])
        assert hessian_distance_form(S, S.origin, e(0, 5), X) == pytest.approx(0.0, abs=1e-15)


class TestPoles:
    def test_distinct_required(self):
        M = Euclidean(3)
        with pytest.raises(ValueError):
            PoleSet(M, np.zeros((2, 3)))

    def test_hemisphere_required(self):
        S = SphereCap(3)
        with pytest.raises(ValueError):
            PoleSet(S, np.array([e(0, 4), e(1, 4)]))

    def test_gram_examples(self):
        M = Euclidean(3)
        P = PoleSet(M, np.array([[-1.0, 0, 0], [1.0, 0, 0]]))
        G = G_matrix(M, P, np.array([0.2, 0, 0]))
        assert G[0, 1] == pytest.approx(-1.0)
        x = np.array([0.0, 1, 0])
        assert G_matrix(M, P, x)[0, 1] == pytest.approx(0.0, abs=1e-15)
        assert v_norm_sq(M, P, x) == pytest.approx(1.0)
        np.testing.assert_allclose(v_field(M, P, np.zeros(3)), 0.0, atol=1e-15)

    def test_gram_diagonal_and_dual_formula(self, model4):
        rng = np.random.default_rng(2)
        P = PoleSet(model4, random_points(model4, rng, 3, radius=0.5))
        x = random_points(model4, rng, 1000)
        G = G_matrix(model4, P, x)
        np.testing.assert_allclose(np.diagonal(G, axis1=-2, axis2=-1), 1.0, atol=1e-12)
        a = v_norm_sq(model4, P, x)
        b = v_norm_sq_rearranged(model4, P, x)
        np.testing.assert_allclose(a, b, rtol=1e-8, atol=1e-8 * np.max(a))


class TestInvariants:
    def test_triangle_inequality_1000(self, model4):
        rng = np.random.default_rng(8)
        x, y, z = (random_points(model4, rng, 1000) for _ in range(3))
        d = model4.distance
        assert np.all(d(x, z) <= d(x, y) + d(y, z) + 1e-12)

    def test_hessian_bilinear_by_polarisation(self, model4):
        rng = np.random.default_rng(9)
        a, x = random_points(model4, rng, 2)
        X, Y = (model4.random_directions(x, rng, 1)[0] for _ in range(2))
        from multipolar_hardy.geometry import hessian_distance_bilinear

        H = lambda u: hessian_distance_form(model4, a, x, u)
        polar = 0.25 * (H(X + Y) - H(X - Y))
        assert polar == pytest.approx(hessian_distance_bilinear(model4, a, x, X, Y), rel=1e-10, abs=1e-12)
        assert hessian_distance_bilinear(model4, a, x, X, Y) == pytest.approx(
            hessian_distance_bilinear(model4, a, x, Y, X), rel=1e-12
        )

    @pytest.mark.parametrize("M", [Euclidean(4), Hyperbolic(4, 1.0), Hyperbolic(4, 3.0)], ids=["flat", "H1", "H3"])
    def test_cartan_hadamard_signs(self, M):
        rng = np.random.default_rng(10)
        a = random_points(M, rng, 1000)
        x = random_points(M, rng, 1000)
        keep = M.distance(a, x) > 1e-6
        a, x = a[keep], x[keep]
        d = M.distance(a, x)
        assert np.all(d * laplacian_distance(M, a, x) - (M.dim - 1) >= -1e-12)
        X = M.random_directions(x[0], rng, len(x))
        assert np.all(hessian_distance_form(M, a, x, X) >= -1e-12)
