import numpy as np
import pytest

from palettediag.ensemble import Partition, _readonly, make_ensemble
from palettediag.pipeline import generate_synthetic_ensemble


def soft_partition(name, rows):
    return Partition(name=name, assignment=_readonly(np.asarray(rows, dtype=float)))


def two_block_ensemble(copies=1):
    """Hard 2-group split of 6 vertices, optionally duplicated."""
    rows = [[1, 1, 1, 0, 0, 0], [0, 0, 0, 1, 1, 1]]
    return make_ensemble(
        [soft_partition(f"p{i}", rows) for i in range(copies)]
    )


@pytest.fixture(scope="session")
def noisy_copies_ensemble():
    """Four noisy soft copies of a planted 3-group partition over 60 vertices."""
    return generate_synthetic_ensemble(
        n=60, k=3, l=4, eta=0.05, mode="soft", seed=11
    )


@pytest.fixture(scope="session")
def split_ensemble():
    """Alternating copies subdivide planted group 0 into its two halves."""
    return generate_synthetic_ensemble(
        n=60, k=3, l=4, eta=0.05, mode="hierarchical-split", seed=3
    )
