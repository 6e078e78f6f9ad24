import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def off_axis_points(rng, n, lo=0.4, hi=1.2):
    """Complex points with |Im| in [lo, hi], away from real supports."""
    return list(rng.uniform(-1, 1, n) + 1j * rng.choice([-1, 1], n) * rng.uniform(lo, hi, n))


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)
