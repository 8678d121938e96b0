import pytest

from surfrates.chart_kernel import get_scenario, sample_events


@pytest.fixture(scope="session")
def torus_drift():
    return get_scenario("torus-breathing-drift")


@pytest.fixture(scope="session")
def torus_static():
    return get_scenario("torus-static")


@pytest.fixture(scope="session")
def sphere_static():
    return get_scenario("sphere-static")


@pytest.fixture(scope="session")
def sphere_rot():
    return get_scenario("sphere-rigid-rotation")


@pytest.fixture(scope="session")
def flat_torus():
    return get_scenario("flat-torus")


@pytest.fixture(scope="session")
def torus_events(torus_drift):
    return sample_events(torus_drift, 5, 1234)
