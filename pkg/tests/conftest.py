import numpy as np
import pytest
import torch

from listae.codec import CodecConfig, new_codec


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_cfg():
    # Smallest config that still exercises both decoder domains.
    return CodecConfig(block_len=8, list_size=2, iterations=1, variant="ir_ae",
                       channels=8, kernel=3, layers=2)


@pytest.fixture
def tiny_codec(tiny_cfg):
    return new_codec(tiny_cfg, seed=99)


@pytest.fixture(autouse=True)
def _torch_single_thread():
    # Keep unit tests snappy and scheduling-independent on small tensors.
    n = torch.get_num_threads()
    torch.set_num_threads(2)
    yield
    torch.set_num_threads(n)
