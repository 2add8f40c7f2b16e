# ================== SYNTHETIC DATASETS ==================
"""
Blok yapılı sentetik etkileşim verisi (testler ve yönsel deneyler için)
"""

import numpy as np

from graph.interactions import InteractionGraph
from utils.errors import ConfigurationError
from utils.helpers import rng_stream


def make_block_dataset(n_users: int = 200, n_items: int = 200, n_blocks: int = 5,
                       p_in: float = 0.15, noise: float = 0.05, seed: int = 0,
                       min_degree: int = 2) -> InteractionGraph:
    """Kullanıcı ve ürünleri n_blocks topluluğa böl

    Her kullanıcı kendi bloğundaki ürünlerle p_in olasılıkla etkileşir.
    Kenarların `noise` oranı blok dışı rastgele ürünlere taşınır (etiket
    gürültüsü). Her kullanıcı en az min_degree etkileşim alır.
    """
    if n_blocks < 1 or n_users < n_blocks or n_items < n_blocks:
        raise ConfigurationError("blok sayısı kullanıcı/ürün sayısını aşamaz")
    if not 0.0 < p_in <= 1.0 or not 0.0 <= noise < 1.0:
        raise ConfigurationError("p_in (0,1], noise [0,1) aralığında olmalı")

    rng = rng_stream(seed, "synthetic")
    user_block = np.arange(n_users) % n_blocks
    item_block = np.arange(n_items) % n_blocks
    items_by_block = [np.flatnonzero(item_block == b) for b in range(n_blocks)]

    pairs = set()
    for user in range(n_users):
        own = items_by_block[user_block[user]]
        chosen = own[rng.random(own.size) < p_in]
        if chosen.size < min_degree:
            chosen = rng.choice(own, size=min(min_degree, own.size), replace=False)
        for item in chosen:
            if noise > 0 and rng.random() < noise:
                outside = np.flatnonzero(item_block != user_block[user])
                if outside.size:
                    item = rng.choice(outside)
            pairs.add((user, int(item)))

    ordered = sorted(pairs)
    users = np.array([u for u, _ in ordered], dtype=np.int64)
    items = np.array([v for _, v in ordered], dtype=np.int64)
    return InteractionGraph(n_users, n_items, users, items)


def make_scaled_dataset(n_edges: int, seed: int = 0, items_per_user: int = 10) -> InteractionGraph:
    """Yaklaşık n_edges kenarlı blok grafı (karmaşıklık ölçümleri için)"""
    n_users = max(2, n_edges // items_per_user)
    n_items = n_users
    n_blocks = max(1, n_users // 50)
    p_in = min(1.0, items_per_user * n_blocks / float(n_items))
    return make_block_dataset(n_users, n_items, n_blocks, p_in, noise=0.0, seed=seed)
