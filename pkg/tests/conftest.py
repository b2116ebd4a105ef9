import numpy as np
import pytest

from aliasmine.classify import ConfusionMatrix, NormalizedConfusionMatrix

# The 5x5 worked example: a1/a2 and a4/a5 confuse each other, a3 stands alone.
EXAMPLE_ROWS = [
    [0.6, 0.4, 0.0, 0.0, 0.0],
    [0.4, 0.55, 0.05, 0.0, 0.0],
    [0.0, 0.0, 0.8, 0.15, 0.05],
    [0.0, 0.05, 0.0, 0.7, 0.25],
    [0.0, 0.0, 0.0, 0.5, 0.5],
]
EXAMPLE_LABELS = ("a1", "a2", "a3", "a4", "a5")

# Integer counts whose row-normalization reproduces EXAMPLE_ROWS exactly
# (all entries are multiples of 1/20).
EXAMPLE_COUNTS = [
    [12, 8, 0, 0, 0],
    [8, 11, 1, 0, 0],
    [0, 0, 16, 3, 1],
    [0, 1, 0, 14, 5],
    [0, 0, 0, 10, 10],
]


@pytest.fixture
def example_matrix() -> NormalizedConfusionMatrix:
    return NormalizedConfusionMatrix(EXAMPLE_LABELS, np.array(EXAMPLE_ROWS))


@pytest.fixture
def example_counts() -> ConfusionMatrix:
    return ConfusionMatrix(EXAMPLE_LABELS, np.array(EXAMPLE_COUNTS))


def random_row_stochastic(rng: np.random.Generator, n: int) -> NormalizedConfusionMatrix:
    """A random normalized confusion matrix built from integer counts.

    Integer counts with equal row sums produce repeated ratios across rows,
    which is exactly the value-equality structure the lattice operators must
    handle.
    """
    counts = rng.integers(0, 8, size=(n, n))
    counts += np.eye(n, dtype=np.int64) * int(rng.integers(1, 10))
    empty = counts.sum(axis=1) == 0
    counts[empty, 0] = 1
    rows = counts / counts.sum(axis=1, keepdims=True)
    return NormalizedConfusionMatrix(tuple(f"a{i}" for i in range(n)), rows)
