from __future__ import annotations

import os

import pytest
from hypothesis import HealthCheck, settings

from wnu_counterexample.catalog import load_example
from wnu_counterexample.consistency import enforce_23_consistency
from wnu_counterexample.deletion import build_family

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile(
    "ci", max_examples=30, deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: builds and enforces the larger example graphs")


@pytest.fixture(scope="session")
def ex1():
    return load_example("example1")


@pytest.fixture(scope="session")
def ex2():
    return load_example("example2")


@pytest.fixture(scope="session")
def ex2x():
    return load_example("example2x")


@pytest.fixture(scope="session")
def ex1_state(ex1):
    tr = ex1.translation
    return enforce_23_consistency(tr.G, tr.H)


@pytest.fixture(scope="session")
def ex1_family(ex1, ex1_state):
    return build_family(ex1.translation, ex1_state, ex1.phi)


@pytest.fixture(scope="session")
def ex2_state(ex2):
    tr = ex2.translation
    return enforce_23_consistency(tr.G, tr.H)


@pytest.fixture(scope="session")
def ex2x_state(ex2x):
    tr = ex2x.translation
    return enforce_23_consistency(tr.G, tr.H)


@pytest.fixture(scope="session")
def order_seeds():
    base = int(os.environ.get("WNU_SEED", "0"))
    return list(range(base, base + 10))
