"""Shared helpers for the test suite."""

import numpy as np
import pytest

from hyperlip.metric import FiniteMetricSpace, sup_dist


def random_metric(rng, m):
    """A random metric on m points with all distances in [1, 2].

    Entries in [1, 2] satisfy the triangle inequality automatically
    (2 <= 1 + 1), so this samples freely without rejection.
    """
    D = rng.uniform(1.0, 2.0, (m, m))
    D = (D + D.T) / 2.0
    np.fill_diagonal(D, 0.0)
    return FiniteMetricSpace(D)


def embedded_metric(points):
    """The sup-norm metric of a finite list of vectors."""
    m = len(points)
    D = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            D[i, j] = sup_dist(points[i], points[j])
    return FiniteMetricSpace(D)


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)
