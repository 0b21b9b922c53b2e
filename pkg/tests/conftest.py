import numpy as np
import pytest

from czreach.factors import fresh_ids
from czreach.sets import new_cpz


@pytest.fixture
def instance_a():
    """Hand-worked 3-D constrained instance with two factors (ids 1, 2)."""
    return new_cpz(
        [0, 2, 1],
        [[0, 1], [3, 2], [1, 5]],
        [[4, 1], [0, 2]],
        [[1, 2], [0, 0], [3, 4]],
        [2, 0, 2],
        [[4, 2], [0, 2]],
        ids=[1, 2],
    )


@pytest.fixture
def instance_b():
    """Companion instance sharing factor 1, plus factor 3."""
    return new_cpz(
        [3, 3, 4],
        [[2, 2], [3, 0], [1, 4]],
        [[3, 2], [3, 0]],
        [[1, 3], [2, 4]],
        [2, 5],
        [[2, 0], [2, 3]],
        ids=[1, 3],
    )


def random_unconstrained_cpz(rng, n, h, p=None):
    p = h if p is None else p
    ids = fresh_ids(p)
    return new_cpz(
        rng.normal(size=n),
        rng.normal(size=(n, h)),
        rng.integers(0, 4, size=(p, h)),
        ids=ids,
    )
