import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("qcond", max_examples=60, deadline=None)
settings.load_profile("qcond")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
