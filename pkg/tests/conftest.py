from dataclasses import replace

import pytest
from hypothesis import settings

from mclds.config import ScenarioConfig

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


def small_config(**kw) -> ScenarioConfig:
    """Four cells, six channels, short horizon: fast enough for unit-level runs."""
    base = ScenarioConfig(num_cells=4, num_channels=6, cpes_per_cell=6, horizon=30, seed=7)
    return replace(base, **kw)


@pytest.fixture
def small():
    return small_config()
