import numpy as np
import pytest

from frad.datagen import GeneratorConfig, generate_dataset


@pytest.fixture(scope="session")
def small_noisy_dataset():
    """300 rows at default noise, shared across tests that just need data."""
    return generate_dataset(GeneratorConfig(n_total=300, seed=1234))


@pytest.fixture(scope="session")
def small_clean_dataset():
    """300 rows with exact class structure (noise_sigma = 0)."""
    return generate_dataset(GeneratorConfig(n_total=300, seed=1234, noise_sigma=0.0))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
