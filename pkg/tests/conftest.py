"""
Pytest configuration and shared fixtures.

Registers the integration marker for the long-running acceptance runs
(full actuation sweeps, dataset generation, training to memorization and
control protocols) and the --run-integration option that enables them.
"""

import numpy as np
import pytest

from src.models.estimator import NetworkSpec
from src.services.bodies.finger import FingerModel
from src.services.scene.shapes import build_rod, default_shape
from src.services.statics import mount_system


def pytest_addoption(parser):
    """Add custom command-line options"""
    parser.addoption(
        "--run-integration",
        action="store_true",
        default=False,
        help="Run long acceptance tests (sweeps, dataset generation, training, control)",
    )


def pytest_configure(config):
    """Register custom markers"""
    config.addinivalue_line(
        "markers", "integration: long-running acceptance test, enabled with --run-integration"
    )


def pytest_collection_modifyitems(config, items):
    """Skip integration tests unless --run-integration is specified"""
    if config.getoption("--run-integration"):
        return

    skip_integration = pytest.mark.skip(reason="need --run-integration option to run")
    for item in items:
        if "integration" in item.keywords:
            item.add_marker(skip_integration)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def default_rod():
    """Unmounted 10 cm rod tapering 0.58 cm -> 0.4 cm"""
    return build_rod(default_shape())


@pytest.fixture
def finger():
    return FingerModel()


@pytest.fixture
def mounted_system(default_rod, finger):
    """Default rod clamped above the straight finger, contact active"""
    return mount_system(default_rod, finger)


@pytest.fixture
def free_system(default_rod):
    """Default rod with the finger removed (no contact)"""
    return mount_system(default_rod, finger_mode="removed")


@pytest.fixture
def tiny_spec():
    """8x8 input, two conv layers (one pooled), one hidden dense layer"""
    return NetworkSpec(input_size=8, conv_filters=[3, 2], pooled_convs=1, dense_units=[4], outputs=8)
