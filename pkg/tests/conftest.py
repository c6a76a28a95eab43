import pytest

from thetatrack.geometry import ConeSystem
from thetatrack.harness import generate_points
from thetatrack.rng import INSTANCE_STREAM, make_rng
from thetatrack.spanner import build_theta_graph


@pytest.fixture(scope="session")
def cs8():
    return ConeSystem(8)


@pytest.fixture(scope="session")
def small_graph(cs8):
    """60-point unit-density instance, k=8."""
    rng = make_rng(1234, INSTANCE_STREAM)
    return build_theta_graph(generate_points(60, rng), cs8)


def random_instance(n, seed, k=8):
    rng = make_rng(seed, INSTANCE_STREAM)
    return build_theta_graph(generate_points(n, rng), ConeSystem(k))
