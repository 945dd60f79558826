import numpy as np
import pytest

from aoc_lab import DistributionSpec


def exp_spec(rate: float) -> DistributionSpec:
    return DistributionSpec(kind="exponential", rate=rate)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=20240810))
