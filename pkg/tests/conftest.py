import os
import random
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'src'))

from exactalg import RingSpec  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-sized randomized suites")


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def ZZ():
    return RingSpec.integers()


@pytest.fixture
def F2():
    return RingSpec.mod(2)


@pytest.fixture
def F3():
    return RingSpec.mod(3)
