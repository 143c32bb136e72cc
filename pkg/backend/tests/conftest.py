"""
conftest.py for backend/tests/

Puts backend/ on sys.path (as the runners do themselves) and provides the
shared fixtures: fixed seeds, the hand-computed n=3 case, small samples.
"""

import os
import sys

import numpy as np
import pytest

_backend_dir = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if _backend_dir not in sys.path:
    sys.path.insert(0, _backend_dir)

from resampling.sampling import WeightVector  # noqa: E402
from resampling.seeding import Seed  # noqa: E402
from resampling.statcore import Sample  # noqa: E402


@pytest.fixture
def seed():
    return Seed(root=20240611, experiment="tests")


@pytest.fixture
def hand_sample():
    """X = (0, 1, 2): X_bar = 1, S_n^2 = 2/3."""
    return Sample.from_values([0.0, 1.0, 2.0])


@pytest.fixture
def hand_weights():
    """w = (2, 1, 0), m_n = 3: a = (1/3, 0, -1/3), V_n^2 = 2/9."""
    return WeightVector.from_counts([2, 1, 0])


@pytest.fixture
def rng():
    """Plain generator for building random test instances (not study draws)."""
    return np.random.default_rng(12345)
