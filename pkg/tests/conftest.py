import sys

import numpy as np
import pytest
from loguru import logger

from app.core.logging import configure_logging
from app.models.shower import ShowerImage
from app.models.training import HybridConfig, TrainConfig
from app.services.data import synth_dataset


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def _logging():
    configure_logging("WARNING")
    yield
    # CliRunner swaps sys.stderr; drop sinks bound to the swapped stream
    logger.remove()
    logger.add(sys.stderr, level="WARNING")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def train_set():
    return synth_dataset(64, seed=3)


@pytest.fixture
def flat_image():
    return ShowerImage(pixels=(0.3,) * 8)


@pytest.fixture
def exact_cfg():
    return TrainConfig(epochs=1, exact_mode=True, mse_sample_size=10)


@pytest.fixture
def hybrid_cfg():
    return HybridConfig(epochs=1, exact_mode=True, mse_sample_size=10)
