import numpy as np
import pytest

from jodag import Ordering, random_ordered_dag, sample_weights, simulate


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def make_scm(p, rng, p_edge=None, sigma=None):
    sigma = sigma or Ordering.identity(p)
    g = random_ordered_dag(p, p_edge, sigma, rng)
    return sample_weights(g, rng=rng)


def make_dataset(p, n, rng, p_edge=None, sigma=None):
    scm = make_scm(p, rng, p_edge=p_edge, sigma=sigma)
    return scm, simulate(scm, n, rng)
