import numpy as np
import pytest

from prepost.scenarios import three_box


@pytest.fixture
def box3():
    return three_box()


@pytest.fixture
def tsv3(box3):
    return box3.two_state()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
