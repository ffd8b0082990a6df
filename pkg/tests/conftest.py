import functools
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mofkit import algebra as alg  # noqa: E402
from mofkit import instances  # noqa: E402
from mofkit.lipschitz import OperatorField  # noqa: E402

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def corpus():
    return tuple(instances.corpus())


@pytest.fixture(scope="session")
def all_instances():
    return corpus()


@pytest.fixture
def e2_model():
    return instances.e2_model()


@pytest.fixture
def e2(e2_model):
    return e2_model.mof()


@pytest.fixture
def e2_identity(e2, e2_model):
    return OperatorField(e2, e2_model.field_values(lambda y: float(y)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
