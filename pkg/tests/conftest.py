import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from roofs.core import FeatureStore


@pytest.fixture
def small_store():
    """2-feature identity-ish store over n=2 samples."""
    store = FeatureStore(2)
    store.add(0, np.array([1.0, 0.0]))
    store.add(1, np.array([0.0, 1.0]))
    return store


def random_store(rng, n_features, n_samples):
    store = FeatureStore(n_samples)
    for fid in range(n_features):
        store.add(fid, rng.standard_normal(n_samples))
    return store
