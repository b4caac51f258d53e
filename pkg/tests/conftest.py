import pytest

from tolsim.simulator import landing_config, run_scenario, takeoff_config


@pytest.fixture(scope="session")
def takeoff_run():
    """Default take-off: Tables I-III values, dt = 1 ms, thrust clamped."""
    return run_scenario(takeoff_config())


@pytest.fixture(scope="session")
def takeoff_unclamped_run():
    return run_scenario(takeoff_config(thrust_clamp=False))


@pytest.fixture(scope="session")
def landing_run():
    """Default landing: Table IV values, dt = 1 ms, clamp disabled."""
    return run_scenario(landing_config())
