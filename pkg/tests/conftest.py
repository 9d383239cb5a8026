"""
Shared fixtures: seeded generators, canonical maps and configurations.
"""

import numpy as np
import pytest

from utils.pappus_utils import config_from_affine
from utils.projective_utils import ProjMap
from utils.schottky_utils import standard_config
from utils.word_utils import GeneratorSet

CYCLIC_EIGS = (2 ** -0.5, 1.0, 2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def cyclic_diag():
    return ProjMap.diagonal(CYCLIC_EIGS)


@pytest.fixture
def cyclic_group(cyclic_diag):
    return GeneratorSet(2, [cyclic_diag])


@pytest.fixture
def parabolic():
    return ProjMap(np.array([[1, 1], [0, 1]]))


@pytest.fixture
def worked_pappus():
    return config_from_affine((0, 0), (1, 0), (3, 0), (0, 1), (2, 1), (5, 1))


@pytest.fixture
def schottky_g2():
    return standard_config(2, 0.25)
