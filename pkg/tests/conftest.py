import numpy as np
import pytest

from subtree_distance.exceptions import InfeasibleParameters
from subtree_distance.schemas.instance import WeightRange
from subtree_distance.schemas.matrix import DissimilarityMatrix
from subtree_distance.services.gen import generate_instance

SINGLETON_FRACTIONS = (0.3, 0.6, 1.0)


def matrix(labels, rows) -> DissimilarityMatrix:
    return DissimilarityMatrix(labels=labels, values=np.array(rows, dtype=float))


def draw_instance(seed: int, *, integer: bool = False, max_objects: int = 30, fractions=SINGLETON_FRACTIONS):
    """
    Random generator parameters and instance for one seed.

    v_count in [2, 50], n_objects in [2, max_objects]; parameter draws that the
    tree cannot host are redrawn.
    """
    rng = np.random.default_rng([seed, 7919])
    weights = WeightRange(lo=1, hi=9, integer=True) if integer else WeightRange(lo=0.5, hi=10.0)
    for _ in range(100):
        v_count = int(rng.integers(2, 51))
        n_objects = int(rng.integers(2, max_objects + 1))
        fraction = float(rng.choice(fractions))
        try:
            return generate_instance(seed, v_count, n_objects, fraction, weights)
        except InfeasibleParameters:
            continue
    pytest.fail(f"No feasible generator parameters for seed {seed}")


@pytest.fixture
def quartet():
    """Tree metric of ((a:1,b:2):5,(c:3,d:4)) on its four leaves"""
    return matrix(
        ["a", "b", "c", "d"],
        [
            [0, 3, 9, 10],
            [3, 0, 10, 11],
            [9, 10, 0, 7],
            [10, 11, 7, 0],
        ],
    )


@pytest.fixture
def violating():
    """d(x,y) = d(z,w) = 10 and every other pair at 1: not a subtree distance"""
    return matrix(
        ["x", "y", "z", "w"],
        [
            [0, 10, 1, 1],
            [10, 0, 1, 1],
            [1, 1, 0, 10],
            [1, 1, 10, 0],
        ],
    )


@pytest.fixture
def interval_instance():
    """z covers the middle third of the a-c path"""
    return matrix(
        ["a", "c", "z"],
        [
            [0, 6, 2],
            [6, 0, 2],
            [2, 2, 0],
        ],
    )


@pytest.fixture
def path_metric():
    return matrix(["a", "b", "c"], [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
