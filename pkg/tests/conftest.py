import numpy as np
import pytest

from amrbench import dataset as ds


@pytest.fixture(scope="session")
def small_corpus():
    """11 schemes x 20 SNR levels x 5 frames = 1100 frames."""
    return ds.generate_dataset(ds.DatasetSpec(frames_per_pair=5, seed=42))


@pytest.fixture(scope="session")
def high_snr_toy():
    """256 easy frames at 16-18 dB for overfit checks."""
    corpus = ds.generate_dataset(
        ds.DatasetSpec(frames_per_pair=12, snr_levels=(16, 18), seed=7)
    )
    return corpus.subset(np.arange(256))
