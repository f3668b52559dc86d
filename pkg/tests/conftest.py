import math

import numpy as np
import pytest

from dendritic_field import GridSpec, build_grid
from dendritic_field.experiments import FIG2_MODEL


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fig2_model():
    return FIG2_MODEL


@pytest.fixture
def small_grid():
    return build_grid(GridSpec(64, 33, 24 * math.pi, 3.0))


@pytest.fixture
def mid_grid():
    return build_grid(GridSpec(128, 65, 24 * math.pi, 3.0))
