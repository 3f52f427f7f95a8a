import numpy as np
import pytest

from cloudgraph import SmoothingConfig, make_fixture

DEFAULTS = SmoothingConfig(radius=0.15, k=32, alpha=0.5, t_order=3)


@pytest.fixture(scope="session")
def default_cfg():
    return DEFAULTS


@pytest.fixture(scope="session")
def airplane():
    return make_fixture("airplane-like", 2048, seed=42)


@pytest.fixture(scope="session")
def two_planes():
    return make_fixture("two-planes-cross", 2048, seed=42)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240810)
