import pytest

from fivebar_haptics.device import DEFAULT_CONFIG, FingerProfile, calibrate


@pytest.fixture(scope="session")
def device_config():
    return DEFAULT_CONFIG


@pytest.fixture(scope="session")
def reference_finger():
    return FingerProfile(thickness=15.0, width=16.0)


@pytest.fixture(scope="session")
def reference_calibration(reference_finger, device_config):
    return calibrate(reference_finger, device_config)
