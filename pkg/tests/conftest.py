import os
from pathlib import Path

import numpy as np
import pytest

from rpusim import mnist

# real dataset location for the data-dependent tests; synthetic fixtures
# cover everything else
DATA_DIR = os.environ.get("RPUSIM_DATA", "/root/data/mnist")
RESULTS_DIR = os.environ.get("RPUSIM_RESULTS", "results/acceptance")


def have_real_data() -> bool:
    return Path(DATA_DIR, mnist.TRAIN_IMAGES).exists()


requires_data = pytest.mark.skipif(
    not have_real_data(), reason=f"canonical dataset not found in {DATA_DIR}")


@pytest.fixture(scope="session")
def idx_dir(tmp_path_factory):
    """A miniature but structurally canonical IDX dataset on disk."""
    d = tmp_path_factory.mktemp("idx")
    rng = np.random.default_rng(0)
    tr_img = rng.integers(0, 256, size=(32, 28, 28), dtype=np.uint8)
    tr_img[0].fill(0)
    tr_img[1].fill(255)
    te_img = rng.integers(0, 256, size=(16, 28, 28), dtype=np.uint8)
    tr_lab = rng.integers(0, 10, size=32, dtype=np.uint8)
    te_lab = rng.integers(0, 10, size=16, dtype=np.uint8)
    mnist.write_idx(tr_img, d / mnist.TRAIN_IMAGES)
    mnist.write_idx(tr_lab, d / mnist.TRAIN_LABELS)
    mnist.write_idx(te_img, d / mnist.TEST_IMAGES)
    mnist.write_idx(te_lab, d / mnist.TEST_LABELS)
    return d


@pytest.fixture(scope="session")
def toy_data():
    """Two linearly separable classes in a 16-dim input, values in [0, 1]."""
    rng = np.random.default_rng(42)
    n = 256
    labels = rng.integers(0, 2, size=n)
    centers = np.stack([np.linspace(0.2, 0.8, 16), np.linspace(0.8, 0.2, 16)])
    images = np.clip(centers[labels] + rng.normal(0, 0.08, (n, 16)), 0, 1)
    return (images[:192].astype(np.float32), labels[:192].astype(np.int64),
            images[192:].astype(np.float32), labels[192:].astype(np.int64))
