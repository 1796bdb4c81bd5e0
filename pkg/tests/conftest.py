import numpy as np
import pytest

from graphfilt.graph import build_shift, gen_geometric_graph


@pytest.fixture(scope="session")
def graph32():
    return gen_geometric_graph(32, 7)


@pytest.fixture(scope="session")
def lap32(graph32):
    return build_shift(graph32, "unnormalized")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
