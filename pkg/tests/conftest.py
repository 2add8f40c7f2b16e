import numpy as np
import pytest

from config.settings import get_train_config
from graph.interactions import InteractionGraph
from graph.synthetic import make_block_dataset


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def tiny_graph():
    """3 kullanıcı, 4 ürün, 6 kenar"""
    users = [0, 0, 1, 1, 2, 2]
    items = [0, 1, 1, 2, 2, 3]
    return InteractionGraph(3, 4, users, items)


@pytest.fixture
def random_graph():
    """Tekrarsız 100 kenarlı rastgele graf"""
    rng = np.random.default_rng(11)
    codes = rng.choice(20 * 15, size=100, replace=False)
    return InteractionGraph(20, 15, codes // 15, codes % 15)


@pytest.fixture
def block_graph():
    return make_block_dataset(30, 30, n_blocks=3, p_in=0.4, noise=0.0, seed=1)


@pytest.fixture
def toy_config():
    return get_train_config(dim=8, layers=2, epochs=3, batch_size=64, lr=0.05, seed=3)
