"""Shared fixtures: a small calibrated pipeline reused across test modules."""
import pytest

from gridspectra import harness


@pytest.fixture(scope="session")
def small_cfg() -> harness.ScenarioConfig:
    """Cheap geometry: 12 buses, 120 samples, 16 calibration runs."""
    return harness.ScenarioConfig(
        seed=11, t=120, network_nodes=13, calibration_runs=16, signature_runs=2
    )


@pytest.fixture(scope="session")
def small_calibration(small_cfg):
    return harness.calibrate(small_cfg)
