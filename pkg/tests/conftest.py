import math

import numpy as np
import pytest

from linkfold.services.foldgen import build_counterexample
from linkfold.services.linkage import make_configuration, make_linkage


@pytest.fixture(scope="session")
def layout_m1():
    return build_counterexample(1)


@pytest.fixture(scope="session")
def layout_m2():
    return build_counterexample(2)


@pytest.fixture(scope="session")
def layout_m3():
    return build_counterexample(3)


@pytest.fixture
def unit_square():
    return make_configuration([(0, 0), (1, 0), (1, 1), (0, 1)], make_linkage([1, 1, 1, 1]))


@pytest.fixture
def bowtie():
    """Quadrilateral whose diagonals cross: bars 1 and 3 meet at (0.5, 0.5)."""
    s = math.sqrt(2.0)
    return make_configuration([(0, 0), (1, 1), (1, 0), (0, 1)], make_linkage([s, 1, s, 1]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
