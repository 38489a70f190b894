import numpy as np
import pytest

from mbmdr import make_dataset


def random_dataset(rng, n=60, q=5, levels=3, missing_rate=0.0):
    """Random dataset with at least one case and control, optional missing entries."""
    g = rng.integers(0, levels, size=(n, q)).astype(np.int16)
    if missing_rate > 0:
        g[rng.random((n, q)) < missing_rate] = -1
    y = rng.integers(0, 2, size=n).astype(np.int8)
    y[0], y[1] = 0, 1  # guarantee both classes
    return make_dataset(g, y, levels=np.full(q, levels))


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)
