import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from multipolar_hardy.geometry import make_manifold

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

MODELS = [("euclidean", 1.0), ("hyperbolic", 1.0), ("hyperbolic", 0.5), ("sphere", 1.0)]


@pytest.fixture(params=MODELS, ids=lambda m: f"{m[0]}-R{m[1]}")
def model4(request):
    kind, R = request.param
    return make_manifold(kind, 4, R)


def random_points(M, rng, m, radius=0.8):
    """Points at geodesic distance <= radius * (chart scale) from the chart origin."""
    u = M.random_directions(M.origin, rng, m)
    r = radius * rng.random(m) ** (1.0 / M.dim)
    return M.polar_point(M.origin, r, u)
