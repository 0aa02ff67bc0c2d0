import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from quasiunits.random_gen import gen_random_psd

settings.register_profile(
    "default", max_examples=40, deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def rand_psd(rng, n, rank=None, real=False):
    if rank is None:
        rank = int(rng.integers(0, n + 1))
    return gen_random_psd(rng, n, rank, real=real)


@st.composite
def psd_matrices(draw, n=None, min_dim=1, max_dim=5, min_rank=0):
    """Random PSD matrices drawn through a hypothesis-chosen seed, dim and rank."""
    dim = draw(st.integers(min_dim, max_dim)) if n is None else n
    rank = draw(st.integers(min(min_rank, dim), dim))
    seed = draw(st.integers(0, 2**32 - 1))
    return gen_random_psd(seed, dim, rank)


@st.composite
def psd_pairs(draw, max_dim=5):
    n = draw(st.integers(1, max_dim))
    return draw(psd_matrices(n=n)), draw(psd_matrices(n=n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
