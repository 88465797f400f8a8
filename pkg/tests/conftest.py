import numpy as np
import pytest

from synchobs.lie_core import SE2, SO3, VAA

ALL_GROUPS = (SO3, SE2, VAA)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def max_abs(x) -> float:
    return float(np.max(np.abs(np.asarray(x))))
