import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dualdomain.inr import DeartifactConfig, DeartifactINR, DualINR, MovementConfig, MovementINR
from dualdomain.inr.encoding import HashGridConfig

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def philox(seed):
    return np.random.Generator(np.random.Philox(seed))


def small_dual(activation="gelu"):
    """A ~1.7k-parameter model: big enough to exercise every block, small enough for FD checks."""
    grid = HashGridConfig(levels=4, base_resolution=4, growth=1.5, table_size_log2=6)
    de = DeartifactConfig(grid=grid, hidden_layers=2, hidden_width=16, activation=activation)
    mv = MovementConfig(hidden_width=16, activation=activation)
    return DualINR(DeartifactINR(de), MovementINR(mv))


@pytest.fixture
def rng():
    return philox(1234)
