"""Shared fixtures: small deterministic shape corpora reused across modules."""

import numpy as np
import pytest

from fouriershape.data import generate_sample


@pytest.fixture(scope="session")
def shape_corpus():
    """20 generated masks with distinct seeds, noise-free for reproducibility."""
    return [
        generate_sample(seed, noise_sigma=0.0).mask for seed in range(100, 120)
    ]


@pytest.fixture(scope="session")
def noisy_samples():
    """A handful of full samples at the default contrast and noise level."""
    return [generate_sample(seed) for seed in range(300, 306)]


def random_blob(rng: np.random.Generator, size: int = 16) -> np.ndarray:
    """Small random mask; may be empty or multi-component on purpose."""
    return (rng.random((size, size)) < 0.35).astype(np.uint8)
