import numpy as np
import pytest

from hqcodec import autodiff as ad


@pytest.fixture
def f64():
    """Run the test in 64-bit precision (gradient checks need it)."""
    prev = ad.default_dtype()
    ad.set_default_dtype(np.float64)
    yield
    ad.set_default_dtype(prev)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
