import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rotvlab.config import load_config
from rotvlab.model import VehicleModel
from rotvlab.params import ServoParams, VehicleParams

settings.register_profile("rotvlab", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("rotvlab")


@pytest.fixture(autouse=True)
def _no_user_config(monkeypatch):
    monkeypatch.delenv("ROTVLAB_CONFIG", raising=False)


@pytest.fixture(scope="session")
def cfg():
    return load_config(None)


@pytest.fixture(scope="session")
def params(cfg):
    return VehicleParams.from_config(cfg)


@pytest.fixture(scope="session")
def model(params):
    return VehicleModel(params)


@pytest.fixture(scope="session")
def servo(cfg):
    return ServoParams.from_config(cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def cylinder_params(radius=0.1, length=1.0, rho=1000.0, **kw):
    """A constant-radius body with no wing contribution to added mass."""
    base = VehicleParams.default()
    half = 0.5 * length
    return base.with_(body_length=length, r_profile=((-half, radius), (half, radius)),
                      fluid_density=rho, k_trans_fw=0.0, k_trans_tw=0.0,
                      k_rot_fw=0.0, k_rot_tw=0.0, **kw)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
